#include "ebt/measure_io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ebt {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string &line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string &field, std::size_t line_no) {
    double value = 0.0;
    const char *begin = field.data();
    const char *end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error("measure CSV line " + std::to_string(line_no) +
                                 ": not a number: '" + field + "'");
    }
    return value;
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

void write_measure_csv(std::ostream &out, const AtomicMeasure &mu) {
    out << (mu.dim() == 1 ? "x,weight\n" : "x,y,weight\n");
    for (std::size_t k = 0; k < mu.size(); ++k) {
        for (int a = 0; a < mu.dim(); ++a) {
            out << format_number(mu.coord(k, a)) << ',';
        }
        out << format_number(mu.weight(k)) << '\n';
    }
}

AtomicMeasure read_measure_csv(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    int dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto header = split_commas(line);
        if (header == std::vector<std::string>{"x", "weight"}) {
            dim = 1;
        } else if (header == std::vector<std::string>{"x", "y", "weight"}) {
            dim = 2;
        } else {
            throw std::runtime_error("measure CSV: expected header 'x,weight' or 'x,y,weight'");
        }
        break;
    }
    if (dim == 0) {
        throw std::runtime_error("measure CSV: missing header");
    }
    AtomicMeasure mu(dim);
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_commas(line);
        if (fields.size() != static_cast<std::size_t>(dim + 1)) {
            throw std::runtime_error("measure CSV line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(dim + 1) + " fields");
        }
        double p[2] = {0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
            p[a] = parse_number(fields[a], line_no);
        }
        mu.add(std::span<const double>(p, dim), parse_number(fields[dim], line_no));
    }
    return mu;
}

std::string measure_to_json(const AtomicMeasure &mu) {
    nlohmann::json j;
    j["dim"] = mu.dim();
    auto points = nlohmann::json::array();
    for (std::size_t k = 0; k < mu.size(); ++k) {
        auto p = mu.point(k);
        points.push_back(std::vector<double>(p.begin(), p.end()));
    }
    j["points"] = std::move(points);
    j["weights"] = mu.weights();
    return j.dump();
}

AtomicMeasure measure_from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw std::runtime_error(std::string("measure JSON: ") + e.what());
    }
    if (!j.contains("dim") || !j.contains("points") || !j.contains("weights")) {
        throw std::runtime_error("measure JSON: requires keys dim, points, weights");
    }
    const int dim = j.at("dim").get<int>();
    AtomicMeasure mu(dim);
    const auto &points = j.at("points");
    const auto &weights = j.at("weights");
    if (!points.is_array() || !weights.is_array() || points.size() != weights.size()) {
        throw std::runtime_error("measure JSON: points and weights must be arrays of equal length");
    }
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto p = points[k].get<std::vector<double>>();
        if (p.size() != static_cast<std::size_t>(dim)) {
            throw std::runtime_error("measure JSON: point " + std::to_string(k) +
                                     " has wrong dimension");
        }
        mu.add(p, weights[k].get<double>());
    }
    return mu;
}

void save_measure(const std::filesystem::path &path, const AtomicMeasure &mu) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    if (path.extension() == ".json") {
        out << measure_to_json(mu) << '\n';
    } else {
        write_measure_csv(out, mu);
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

AtomicMeasure load_measure(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    if (path.extension() == ".json") {
        std::stringstream ss;
        ss << in.rdbuf();
        return measure_from_json(ss.str());
    }
    return read_measure_csv(in);
}

} // namespace ebt

#include "expdiff/data_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_num(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ": bad numeric field '" + s + "'");
    }
}

long parse_index(const std::string& s, const std::string& path) {
    const double v = parse_num(s, path);
    const long i = static_cast<long>(std::llround(v));
    if (i < 0 || std::abs(v - static_cast<double>(i)) > 1e-9)
        throw IoError(path + ": bad index field '" + s + "'");
    return i;
}

}  // namespace

void write_observations_csv(const ObservationSet& obs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    bool any_exposure = false;
    for (double c : obs.exposure)
        if (c != 1.0) any_exposure = true;
    out << (any_exposure ? "sample,dim,value,exposure\n" : "sample,dim,value\n");
    for (std::size_t i = 0; i < obs.n_samples(); ++i) {
        for (std::size_t j = 0; j < obs.dim(); ++j) {
            if (!obs.observed(i, j)) continue;
            out << i << ',' << j << ',' << format_double(obs.values(i, j));
            if (any_exposure) out << ',' << format_double(obs.exposure[j]);
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing: " + path);
}

ObservationSet read_observations_csv(const std::string& path,
                                     const LikelihoodFamily& family,
                                     std::size_t expected_dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw IoError(path + ": empty file");
    bool has_exposure;
    if (header == "sample,dim,value")
        has_exposure = false;
    else if (header == "sample,dim,value,exposure")
        has_exposure = true;
    else
        throw IoError(path + ": unexpected header '" + header + "'");

    struct Cell {
        long sample, dim;
        double value;
    };
    std::vector<Cell> cells;
    std::map<long, double> exposure_by_dim;
    long max_sample = -1, max_dim = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != (has_exposure ? 4u : 3u))
            throw IoError(path + ": wrong field count in '" + line + "'");
        Cell c{parse_index(fields[0], path), parse_index(fields[1], path),
               parse_num(fields[2], path)};
        if (has_exposure) {
            const double e = parse_num(fields[3], path);
            auto [it, inserted] = exposure_by_dim.emplace(c.dim, e);
            if (!inserted && it->second != e)
                throw IoError(path + ": inconsistent exposure for dim " +
                              std::to_string(c.dim));
        }
        max_sample = std::max(max_sample, c.sample);
        max_dim = std::max(max_dim, c.dim);
        cells.push_back(c);
    }
    const std::size_t n = static_cast<std::size_t>(max_sample + 1);
    std::size_t d = static_cast<std::size_t>(max_dim + 1);
    if (expected_dim > 0) {
        if (d > expected_dim)
            throw IoError(path + ": dim index exceeds configured d");
        d = expected_dim;
    }
    ObservationSet obs;
    obs.family = family;
    obs.values = Mat(n, d, 0.0);
    obs.mask.assign(n * d, 0);
    obs.exposure.assign(d, 1.0);
    for (const auto& [dim, e] : exposure_by_dim)
        obs.exposure[static_cast<std::size_t>(dim)] = e;
    for (const Cell& c : cells) {
        const std::size_t idx = static_cast<std::size_t>(c.sample) * d +
                                static_cast<std::size_t>(c.dim);
        if (obs.mask[idx])
            throw IoError(path + ": duplicate (sample, dim) pair (" +
                          std::to_string(c.sample) + ", " +
                          std::to_string(c.dim) + ")");
        obs.mask[idx] = 1;
        obs.values(static_cast<std::size_t>(c.sample),
                   static_cast<std::size_t>(c.dim)) = c.value;
    }
    obs.validate();
    return obs;
}

void write_truth_csv(const Vec& x0_true, const Vec& theta_true,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "dim,x0_true,theta_true\n";
    for (std::size_t j = 0; j < x0_true.size(); ++j)
        out << j << ',' << format_double(x0_true[j]) << ','
            << format_double(theta_true[j]) << '\n';
    if (!out) throw IoError("failed writing: " + path);
}

void read_truth_csv(const std::string& path, Vec& x0_true, Vec& theta_true) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "dim,x0_true,theta_true")
        throw IoError(path + ": unexpected truth header");
    x0_true.clear();
    theta_true.clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw IoError(path + ": wrong field count in '" + line + "'");
        const long j = parse_index(fields[0], path);
        if (static_cast<std::size_t>(j) != x0_true.size())
            throw IoError(path + ": truth rows must be ordered by dim");
        x0_true.push_back(parse_num(fields[1], path));
        theta_true.push_back(parse_num(fields[2], path));
    }
}

void write_samples_csv(const SampleSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "sample,dim,x0,theta\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = 0; j < set.dim(); ++j) {
            const double x0 = set.x0(i, j);
            out << i << ',' << j << ',' << format_double(x0) << ','
                << format_double(inv_link_scalar(set.link, x0)) << '\n';
        }
    }
    if (!out) throw IoError("failed writing: " + path);
}

Mat read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "sample,dim,x0,theta")
        throw IoError(path + ": unexpected samples header");
    std::vector<std::pair<std::pair<long, long>, double>> rows;
    long max_sample = -1, max_dim = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw IoError(path + ": wrong field count in '" + line + "'");
        const long i = parse_index(fields[0], path);
        const long j = parse_index(fields[1], path);
        rows.push_back({{i, j}, parse_num(fields[2], path)});
        max_sample = std::max(max_sample, i);
        max_dim = std::max(max_dim, j);
    }
    Mat x0(static_cast<std::size_t>(max_sample + 1),
           static_cast<std::size_t>(max_dim + 1));
    for (const auto& [ij, v] : rows)
        x0(static_cast<std::size_t>(ij.first),
           static_cast<std::size_t>(ij.second)) = v;
    return x0;
}

}  // namespace expdiff

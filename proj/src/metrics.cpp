#include "expdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "expdiff/errors.hpp"
#include "expdiff/util.hpp"

namespace expdiff {

namespace {
double quantile_sorted(const Vec& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 0) throw ConfigError("quantile of empty sample");
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}
}  // namespace

double quantile(Vec samples, double q) {
    std::sort(samples.begin(), samples.end());
    return quantile_sorted(samples, q);
}

double wasserstein1(const Vec& a, const Vec& b, int n_quantiles) {
    if (a.empty() || b.empty())
        throw ConfigError("wasserstein1 requires nonempty samples");
    Vec sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double acc = 0.0;
    for (int k = 0; k < n_quantiles; ++k) {
        const double q = (k + 0.5) / n_quantiles;
        acc += std::abs(quantile_sorted(sa, q) - quantile_sorted(sb, q));
    }
    return acc / n_quantiles;
}

double coverage(const Vec& truth, const Vec& lo, const Vec& hi) {
    if (truth.size() != lo.size() || truth.size() != hi.size())
        throw ConfigError("coverage: length mismatch");
    std::size_t inside = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!(lo[j] <= hi[j])) throw ConfigError("coverage: unordered bounds");
        if (truth[j] >= lo[j] && truth[j] <= hi[j]) ++inside;
    }
    return truth.empty() ? 0.0
                         : static_cast<double>(inside) /
                               static_cast<double>(truth.size());
}

namespace {
DimMetrics summarize_sorted(Vec col) {
    std::sort(col.begin(), col.end());
    DimMetrics m;
    m.q025 = quantile_sorted(col, 0.025);
    m.q25 = quantile_sorted(col, 0.25);
    m.median = quantile_sorted(col, 0.5);
    m.q75 = quantile_sorted(col, 0.75);
    m.q975 = quantile_sorted(col, 0.975);
    return m;
}

Vec column(const Mat& m, std::size_t j) {
    Vec col(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) col[i] = m(i, j);
    return col;
}
}  // namespace

DimMetrics summarize_dim(const Mat& samples, std::size_t j) {
    return summarize_sorted(column(samples, j));
}

MetricsReport compute_metrics(const SampleSet& method, const Mat& mcmc_x0,
                              const Vec& truth_x0, const Vec& truth_theta) {
    if (method.size() == 0) throw ConfigError("metrics: empty sample set");
    const std::size_t d = method.dim();
    MetricsReport m;
    m.truth_x0 = truth_x0;
    m.truth_theta = truth_theta;
    m.drop_rate = method.requested > 0
                      ? static_cast<double>(method.dropped) /
                            static_cast<double>(method.requested)
                      : 0.0;
    const Mat theta = method.theta();
    Vec lo(d), hi(d), med_theta(d);
    for (std::size_t j = 0; j < d; ++j) {
        m.method_x0.push_back(summarize_dim(method.x0, j));
        const DimMetrics mt = summarize_dim(theta, j);
        m.method_theta.push_back(mt);
        lo[j] = mt.q025;
        hi[j] = mt.q975;
        med_theta[j] = mt.median;
    }
    if (mcmc_x0.rows > 0) {
        if (mcmc_x0.cols != d) throw ConfigError("metrics: MCMC dim mismatch");
        m.median_abs_diff.resize(d);
        m.wasserstein.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            m.mcmc_x0.push_back(summarize_dim(mcmc_x0, j));
            m.median_abs_diff[j] =
                std::abs(m.method_x0[j].median - m.mcmc_x0[j].median);
            m.wasserstein[j] =
                wasserstein1(column(method.x0, j), column(mcmc_x0, j));
        }
    }
    if (!truth_theta.empty()) {
        m.ci_coverage = coverage(truth_theta, lo, hi);
        double mae = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            mae += std::abs(med_theta[j] - truth_theta[j]);
        m.median_mae = mae / static_cast<double>(d);
    }
    return m;
}

void write_metrics_csv(const MetricsReport& m, const std::string& path) {
    if (m.method_x0.empty()) throw ConfigError("refusing to write empty metrics");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open metrics file: " + path);
    out << "dim,x0_median,x0_q025,x0_q25,x0_q75,x0_q975,"
           "theta_median,theta_q025,theta_q975,"
           "mcmc_x0_median,mcmc_x0_q025,mcmc_x0_q975,"
           "truth_x0,truth_theta,median_abs_diff,wasserstein1\n";
    const bool has_mcmc = !m.mcmc_x0.empty();
    for (std::size_t j = 0; j < m.dim(); ++j) {
        out << j << ',' << format_double(m.method_x0[j].median) << ','
            << format_double(m.method_x0[j].q025) << ','
            << format_double(m.method_x0[j].q25) << ','
            << format_double(m.method_x0[j].q75) << ','
            << format_double(m.method_x0[j].q975) << ','
            << format_double(m.method_theta[j].median) << ','
            << format_double(m.method_theta[j].q025) << ','
            << format_double(m.method_theta[j].q975) << ',';
        if (has_mcmc)
            out << format_double(m.mcmc_x0[j].median) << ','
                << format_double(m.mcmc_x0[j].q025) << ','
                << format_double(m.mcmc_x0[j].q975) << ',';
        else
            out << ",,,";
        out << format_double(m.truth_x0.empty() ? 0.0 : m.truth_x0[j]) << ','
            << format_double(m.truth_theta.empty() ? 0.0 : m.truth_theta[j])
            << ','
            << format_double(m.median_abs_diff.empty() ? 0.0
                                                       : m.median_abs_diff[j])
            << ','
            << format_double(m.wasserstein.empty() ? 0.0 : m.wasserstein[j])
            << '\n';
    }
    out << "# ci_coverage=" << format_double(m.ci_coverage)
        << " median_mae=" << format_double(m.median_mae)
        << " drop_rate=" << format_double(m.drop_rate) << '\n';
    if (!out) throw IoError("failed writing metrics file: " + path);
}

namespace {

struct SvgMapper {
    double x0, y0, w, h;  // plot area
    double dmax, vmin, vmax;
    double px(double dim) const { return x0 + dim / (dmax + 1e-12) * w; }
    double py(double val) const {
        return y0 + h - (val - vmin) / (vmax - vmin + 1e-12) * h;
    }
};

void svg_errorbar(std::ostream& os, const SvgMapper& map, double x, double lo,
                  double mid, double hi, const char* color, double dx) {
    const double px = map.px(x) + dx;
    os << "<line x1=\"" << px << "\" y1=\"" << map.py(lo) << "\" x2=\"" << px
       << "\" y2=\"" << map.py(hi) << "\" stroke=\"" << color
       << "\" stroke-width=\"1.2\"/>\n";
    os << "<circle cx=\"" << px << "\" cy=\"" << map.py(mid)
       << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
}

}  // namespace

void write_report_svg(const MetricsReport& m, const std::string& path) {
    if (m.method_x0.empty()) throw ConfigError("refusing to write empty report");
    const std::size_t d = m.dim();
    const bool has_mcmc = !m.mcmc_x0.empty();

    double vmin = 1e300, vmax = -1e300;
    auto stretch = [&](double v) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    };
    for (std::size_t j = 0; j < d; ++j) {
        stretch(m.method_x0[j].q025);
        stretch(m.method_x0[j].q975);
        if (has_mcmc) {
            stretch(m.mcmc_x0[j].q025);
            stretch(m.mcmc_x0[j].q975);
        }
        if (!m.truth_x0.empty()) stretch(m.truth_x0[j]);
    }
    const double pad = 0.05 * (vmax - vmin + 1e-12);
    vmin -= pad;
    vmax += pad;

    const double W = 900, H = 420;
    SvgMapper map{60, 20, W - 80, H - 70,
                  static_cast<double>(d > 1 ? d - 1 : 1), vmin, vmax};

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
       << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H
       << "\" fill=\"white\"/>\n";
    os << "<line x1=\"" << map.x0 << "\" y1=\"" << map.y0 + map.h << "\" x2=\""
       << map.x0 + map.w << "\" y2=\"" << map.y0 + map.h
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << map.x0 << "\" y1=\"" << map.y0 << "\" x2=\""
       << map.x0 << "\" y2=\"" << map.y0 + map.h << "\" stroke=\"black\"/>\n";

    for (std::size_t j = 0; j < d; ++j) {
        svg_errorbar(os, map, static_cast<double>(j), m.method_x0[j].q025,
                     m.method_x0[j].median, m.method_x0[j].q975, "#1f77b4",
                     -3.0);
        if (has_mcmc)
            svg_errorbar(os, map, static_cast<double>(j), m.mcmc_x0[j].q025,
                         m.mcmc_x0[j].median, m.mcmc_x0[j].q975, "#ff7f0e",
                         3.0);
        if (!m.truth_x0.empty()) {
            const double px = map.px(static_cast<double>(j));
            const double py = map.py(m.truth_x0[j]);
            os << "<path d=\"M" << px - 3 << " " << py - 3 << " L" << px + 3
               << " " << py + 3 << " M" << px - 3 << " " << py + 3 << " L"
               << px + 3 << " " << py - 3
               << "\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
        }
    }
    os << "<text x=\"" << map.x0 << "\" y=\"" << H - 14
       << "\" font-size=\"12\" fill=\"#1f77b4\">diffusion posterior "
          "(median, 95% CI)</text>\n";
    if (has_mcmc)
        os << "<text x=\"" << map.x0 + 260 << "\" y=\"" << H - 14
           << "\" font-size=\"12\" fill=\"#ff7f0e\">MCMC reference</text>\n";
    os << "<text x=\"" << map.x0 + 450 << "\" y=\"" << H - 14
       << "\" font-size=\"12\" fill=\"black\">x = truth</text>\n";
    os << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw IoError("cannot open report file: " + path);
    out << os.str();
    if (!out) throw IoError("failed writing report file: " + path);
}

}  // namespace expdiff

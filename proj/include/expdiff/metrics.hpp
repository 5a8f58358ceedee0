#pragma once

#include <string>
#include <vector>

#include "expdiff/linalg.hpp"
#include "expdiff/sampler.hpp"

namespace expdiff {

// Type-7 quantile (linear interpolation between order statistics) of an
// unsorted sample.
double quantile(Vec samples, double q);

// Mean absolute difference of sorted, quantile-aligned samples, resampled at
// n_quantiles points; the per-dimension 1-Wasserstein distance.
double wasserstein1(const Vec& a, const Vec& b, int n_quantiles = 512);

// Fraction of dimensions whose truth lies inside [lo, hi].
double coverage(const Vec& truth, const Vec& lo, const Vec& hi);

struct DimMetrics {
    double median = 0.0, q025 = 0.0, q25 = 0.0, q75 = 0.0, q975 = 0.0;
};

DimMetrics summarize_dim(const Mat& samples, std::size_t j);

struct MetricsReport {
    // Latent (x0) space summaries drive the method-vs-MCMC comparisons.
    std::vector<DimMetrics> method_x0;
    std::vector<DimMetrics> mcmc_x0;  // empty when no reference was run
    // Parameter (theta) space summaries drive coverage and MAE vs truth.
    std::vector<DimMetrics> method_theta;
    Vec truth_x0;
    Vec truth_theta;
    Vec median_abs_diff;  // |method - mcmc| medians, x0 space
    Vec wasserstein;      // per-dimension W1 vs MCMC, x0 space
    double ci_coverage = 0.0;  // truth_theta inside the method's 95% CI
    double median_mae = 0.0;   // MAE of theta medians vs truth
    double drop_rate = 0.0;

    std::size_t dim() const { return method_x0.size(); }
};

// mcmc_x0 may be empty (no reference posterior).
MetricsReport compute_metrics(const SampleSet& method, const Mat& mcmc_x0,
                              const Vec& truth_x0, const Vec& truth_theta);

void write_metrics_csv(const MetricsReport& m, const std::string& path);

// Per-dimension medians (dots) with 95% error bars for each method plus
// truth crosses, in x0 space; self-contained SVG, no external resources.
void write_report_svg(const MetricsReport& m, const std::string& path);

}  // namespace expdiff

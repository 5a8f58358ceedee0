#pragma once

#include <string>

#include "expdiff/expfam.hpp"
#include "expdiff/sampler.hpp"

// CSV formats:
//   observations: header "sample,dim,value[,exposure]"; absent (sample, dim)
//                 pairs are treated as masked.
//   truth:        header "dim,x0_true,theta_true".
//   samples:      header "sample,dim,x0,theta".
// Floats are written with 17 significant digits so finite values round-trip
// bit-exactly.

namespace expdiff {

void write_observations_csv(const ObservationSet& obs, const std::string& path);
ObservationSet read_observations_csv(const std::string& path,
                                     const LikelihoodFamily& family,
                                     std::size_t expected_dim = 0);

void write_truth_csv(const Vec& x0_true, const Vec& theta_true,
                     const std::string& path);
void read_truth_csv(const std::string& path, Vec& x0_true, Vec& theta_true);

void write_samples_csv(const SampleSet& set, const std::string& path);
// Reads the x0 columns back into a matrix (theta is derived data).
Mat read_samples_csv(const std::string& path);

}  // namespace expdiff

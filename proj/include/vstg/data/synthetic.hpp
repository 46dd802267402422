// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vstg/data/dataset.hpp"

namespace vstg {

/// Action-grammar benchmark. Each sample draws an observed class c
/// uniformly, then a target class t with
///
///   P(t | c) = lambda * M[c, t] + (1 - lambda) / N
///
/// where M is a row-stochastic transition matrix (by default the
/// permutation matrix of a random successor map). Every stored step is
/// prototype(c) + N(0, noise_sigma^2) per dimension. Semantic row c is
/// lambda * u_c + (1 - lambda) * g for class-specific Gaussian u_c and a
/// shared Gaussian g, so lambda = 0 makes all rows identical.
struct SynthConfig {
  std::size_t n_classes = 10;
  std::size_t d_v = 32;
  std::size_t d_s = 16;
  double noise_sigma = 0.1;
  double informativeness = 1.0;  // lambda
  /// Optional N x N row-stochastic matrix overriding the successor map.
  Tensor transition;
  std::size_t n_train = 2000;
  std::size_t n_val = 500;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> modalities{"rgb"};
  AnticipationProtocol protocol;

  void validate() const;
};

struct SyntheticDataset {
  Dataset data;
  std::map<std::string, Tensor> prototypes;  // per modality, N x d_v
  Tensor transition;                         // M, N x N
  std::vector<std::size_t> successor;        // argmax row of M
  /// Expected Top-1 of the Bayes-optimal predictor on the validation split
  /// at the selection step, using the first modality.
  double bayes_ceiling_top1 = 0.0;
};

SyntheticDataset generate_synthetic(const SynthConfig& cfg);

/// P(target | class posterior) for each class under the generator's model.
std::vector<double> target_distribution(const SynthConfig& cfg, const Tensor& transition, std::size_t obs_class);

/// Mean over `samples` of max_t P(t | observed window at step n), the
/// posterior over observed classes being exact for isotropic Gaussian noise
/// around `prototypes` with a uniform class prior.
double bayes_ceiling_top1(const SynthConfig& cfg, const Tensor& prototypes, const Tensor& transition,
                          const std::vector<Sample>& samples, const std::string& modality, std::size_t n);

}  // namespace vstg

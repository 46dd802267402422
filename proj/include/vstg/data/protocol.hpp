// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "vstg/numcore/tensor.hpp"

namespace vstg {

/// Timing contract between a stored window and an anticipation step.
///
/// A stored sample holds s_enc + s_ant feature steps ending at the target
/// start. For anticipation step n the model sees the earliest
/// observed_steps(n) of them, so the observation ends n * alpha_s seconds
/// before the target action begins.
struct AnticipationProtocol {
  std::size_t s_enc = 6;
  std::size_t s_ant = 8;
  double alpha_s = 0.25;

  void validate() const;
  std::size_t total_steps() const noexcept { return s_enc + s_ant; }
  /// s_enc + s_ant - n. Throws ProtocolError unless 1 <= n <= s_ant.
  std::size_t observed_steps(std::size_t n) const;
  /// n * alpha_s seconds.
  double anticipation_time(std::size_t n) const;
  double observation_time(std::size_t n) const;
  /// Anticipation step used for model selection (1 s at the default interval).
  std::size_t selection_step() const;

  void check_step(std::size_t n) const;
};

/// The earliest observed_steps(n) rows of a stored window.
Tensor observed_window(const Tensor& stored_steps, const AnticipationProtocol& protocol, std::size_t n);

}  // namespace vstg

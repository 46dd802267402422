// SPDX-License-Identifier: Apache-2.0
#include "vstg/data/protocol.hpp"

#include <cmath>
#include <string>

#include "vstg/error.hpp"

namespace vstg {

void AnticipationProtocol::validate() const {
  if (s_enc < 1 || s_ant < 1 || !(alpha_s > 0.0)) {
    throw ConfigError("protocol requires s_enc >= 1, s_ant >= 1, alpha_s > 0");
  }
}

void AnticipationProtocol::check_step(std::size_t n) const {
  if (n < 1 || n > s_ant) {
    throw ProtocolError("anticipation step " + std::to_string(n) + " outside [1, " + std::to_string(s_ant) + "]");
  }
}

std::size_t AnticipationProtocol::observed_steps(std::size_t n) const {
  check_step(n);
  return s_enc + s_ant - n;
}

double AnticipationProtocol::anticipation_time(std::size_t n) const {
  check_step(n);
  return static_cast<double>(n) * alpha_s;
}

double AnticipationProtocol::observation_time(std::size_t n) const {
  return static_cast<double>(observed_steps(n)) * alpha_s;
}

std::size_t AnticipationProtocol::selection_step() const {
  const auto n = static_cast<std::size_t>(std::lround(1.0 / alpha_s));
  return n < 1 ? 1 : (n > s_ant ? s_ant : n);
}

Tensor observed_window(const Tensor& stored_steps, const AnticipationProtocol& protocol, std::size_t n) {
  const std::size_t keep = protocol.observed_steps(n);
  if (stored_steps.rows() != protocol.total_steps()) {
    throw ProtocolError("stored window has " + std::to_string(stored_steps.rows()) + " steps, expected " +
                        std::to_string(protocol.total_steps()));
  }
  return stored_steps.slice_rows(0, keep);
}

}  // namespace vstg

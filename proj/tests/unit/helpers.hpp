// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "vstg/numcore/grad_check.hpp"
#include "vstg/numcore/layers.hpp"

namespace vstg::testing {

inline Var rand_param(Rng& rng, std::size_t r, std::size_t c, double sd = 1.0) {
  return Var::param(rng.normal_tensor(r, c, sd));
}

inline void expect_tensor_near(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_EQ(a.shape(), b.shape()) << shape_str(a.shape()) << " vs " << shape_str(b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "at element " << i;
}

inline void expect_grad_ok(const std::function<Var()>& f, std::vector<NamedParam> params, double tol = 1e-4) {
  const GradCheckReport r = grad_check(f, params, {tol});
  EXPECT_TRUE(r.passed) << r.summary();
}

/// Naive triple-loop product.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vstg_test_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vstg::testing

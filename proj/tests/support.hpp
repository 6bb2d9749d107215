#pragma once

#include "rpgrasp/geometry.hpp"
#include "rpgrasp/gripper.hpp"
#include "rpgrasp/point_cloud.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

namespace rpgrasp::test {

inline ::testing::AssertionResult poses_near(const Pose& a, const Pose& b, double tol) {
  const Eigen::Matrix4d d = matrix_oracle(a) - matrix_oracle(b);
  if (d.cwiseAbs().maxCoeff() <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "poses differ by " << d.cwiseAbs().maxCoeff() << "\n"
                                       << matrix_oracle(a) << "\nvs\n"
                                       << matrix_oracle(b);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "rpgrasp_" + tag;
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

}  // namespace rpgrasp::test

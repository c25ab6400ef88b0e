#include "helpers.hpp"

#include <cstdlib>

#include <Eigen/SVD>

namespace taco_test {

double prox_objective(const Matrix& x, const Matrix& m, double tau) {
  Eigen::JacobiSVD<Matrix> svd(x);
  return 0.5 * (x - m).squaredNorm() + tau * svd.singularValues().sum();
}

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("taco-" + tag + "-" + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

int run_shell(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace taco_test

#pragma once

#include <c0ip/c0ip_operator.hpp>

#include <Eigen/Dense>

#include <random>
#include <span>
#include <vector>

namespace c0ip::testing
{
  inline std::vector<double>
  random_vector(std::size_t n, unsigned seed)
  {
    std::mt19937                           rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double>                    v(n);
    for (auto &x : v)
      x = dist(rng);
    return v;
  }

  inline Eigen::VectorXd
  to_eigen(std::span<const double> v)
  {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  inline std::vector<double>
  to_std(const Eigen::VectorXd &v)
  {
    return std::vector<double>(v.data(), v.data() + v.size());
  }

  inline Eigen::MatrixXd
  level_matrix(const MeshHierarchy &hier, unsigned level, double scale = 1.0)
  {
    const Basis1D basis(hier.degree());
    return build_level_operator<double>(hier, level, basis,
                                        default_penalty(hier.degree(), scale))
      .materialize();
  }

  inline double
  max_abs(const Eigen::MatrixXd &A)
  {
    return A.cwiseAbs().maxCoeff();
  }

  inline double
  energy_norm(const Eigen::MatrixXd &A, const Eigen::VectorXd &e)
  {
    return std::sqrt(e.dot(A * e));
  }
} // namespace c0ip::testing

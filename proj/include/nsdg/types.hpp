#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

namespace nsdg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Space-time fields f(x, t) and purely spatial fields f(x).
using VectorField = std::function<Vec2(const Vec2&, double)>;
using SpatialField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&, double)>;

} // namespace nsdg

#pragma once

#include <Eigen/Dense>

namespace psg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kCertificateSlack = 1e-9;

} // namespace psg

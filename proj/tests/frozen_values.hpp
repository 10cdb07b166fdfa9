#pragma once

// Reference values produced by tests/oracles/frozen_values.py (numpy).

namespace colprune::frozen {

// w = I2, x = [[1, -1], [2, -2]]
inline constexpr double kScoreWanda[] = {1.4142135623730951, 2.8284271247461903};
inline constexpr double kScoreVariance[] = {1.4142135623730951, 11.313708498984761};

// y = [[1, 2, 0.5], [-1, 0.25, 3]], z = [[0.5, 1.5, -1], [2, -0.5, 1]]
inline constexpr double kY[] = {1.0, 2.0, 0.5, -1.0, 0.25, 3.0};
inline constexpr double kZ[] = {0.5, 1.5, -1.0, 2.0, -0.5, 1.0};
inline constexpr double kProcrustesQ[] = {0.6422198626104071, 0.7665204811801634, -0.7665204811801632,
                                          0.6422198626104072};
inline constexpr double kProcrustesResidual = 3.4633771977439634;
inline constexpr double kScaledS = 0.6895724792084098;
inline constexpr double kScaledResidual = 3.3394289503275427;
inline constexpr double kLeastSquaresA[] = {0.9473684210526315, 0.4210526315789474, -0.8842105263157893,
                                            0.04035087719298222};
inline constexpr double kLeastSquaresResidual = 3.0067176251176266;
inline constexpr double kBias[] = {0.8333333333333334, -0.08333333333333333};
inline constexpr double kBiasResidual = 3.7693942926328807;

}  // namespace colprune::frozen

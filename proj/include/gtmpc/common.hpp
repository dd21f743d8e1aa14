/*
 Copyright 2026 The gtmpc authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef GTMPC_COMMON_HPP
#define GTMPC_COMMON_HPP

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace gtmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default tolerances used across the library.
inline constexpr double kTolEq = 1e-6;   // equality / fixed-point residual
inline constexpr double kTolCon = 1e-8;  // inequality satisfaction

/// Thrown when a problem has no admissible solution (e.g. initial state
/// outside the feasibility set).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when the numerical solver stops without a usable answer.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void check_dim(const Vec& v, Eigen::Index expected, const char* what) {
    if (v.size() != expected) {
        throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                    std::to_string(expected) + ", got " +
                                    std::to_string(v.size()));
    }
}

}  // namespace gtmpc

#endif  // GTMPC_COMMON_HPP

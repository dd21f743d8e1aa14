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
#ifndef GTMPC_CONSTRAINTS_HPP
#define GTMPC_CONSTRAINTS_HPP

#include <utility>

#include "gtmpc/common.hpp"

namespace gtmpc {

/// Admissible set for states or inputs: an axis-aligned box (components may
/// be unbounded) or a polytope {y : H y <= h}.
class ConstraintSet {
public:
    enum class Kind { Box, Polytope };

    static ConstraintSet box(Vec lower, Vec upper) {
        if (lower.size() != upper.size()) {
            throw std::invalid_argument("ConstraintSet::box: bound size mismatch");
        }
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (lower[i] > upper[i]) {
                throw std::invalid_argument("ConstraintSet::box: lower > upper");
            }
        }
        ConstraintSet s;
        s.kind_ = Kind::Box;
        s.dim_ = static_cast<int>(lower.size());
        s.lower_ = std::move(lower);
        s.upper_ = std::move(upper);
        return s;
    }

    /// Box |y_i| <= radius in every component.
    static ConstraintSet inf_box(int dim, double radius) {
        return box(Vec::Constant(dim, -radius), Vec::Constant(dim, radius));
    }

    static ConstraintSet unbounded(int dim) {
        return box(Vec::Constant(dim, -kInf), Vec::Constant(dim, kInf));
    }

    static ConstraintSet polytope(Mat H, Vec h) {
        if (H.rows() != h.size()) {
            throw std::invalid_argument("ConstraintSet::polytope: H/h row mismatch");
        }
        ConstraintSet s;
        s.kind_ = Kind::Polytope;
        s.dim_ = static_cast<int>(H.cols());
        s.H_ = std::move(H);
        s.h_ = std::move(h);
        return s;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }

    bool is_box() const { return kind_ == Kind::Box; }

    bool bounded() const {
        if (kind_ == Kind::Polytope) return true;  // not checked for polytopes
        return lower_.allFinite() && upper_.allFinite();
    }

    /// True iff every defining inequality is violated by at most tol.
    bool contains(const Vec& y, double tol = kTolCon) const {
        check_dim(y, dim_, "ConstraintSet::contains");
        if (kind_ == Kind::Box) {
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                if (y[i] < lower_[i] - tol || y[i] > upper_[i] + tol) return false;
            }
            return true;
        }
        return ((H_ * y - h_).array() <= tol).all();
    }

    /// Polytope form (H, h) with H y <= h. A box contributes two rows per
    /// finite bound; unbounded components yield no row.
    std::pair<Mat, Vec> as_inequalities() const {
        if (kind_ == Kind::Polytope) return {H_, h_};
        int rows = 0;
        for (Eigen::Index i = 0; i < dim_; ++i) {
            if (upper_[i] < kInf) ++rows;
            if (lower_[i] > -kInf) ++rows;
        }
        Mat H = Mat::Zero(rows, dim_);
        Vec h(rows);
        int r = 0;
        for (Eigen::Index i = 0; i < dim_; ++i) {
            if (upper_[i] < kInf) {
                H(r, i) = 1.0;
                h[r++] = upper_[i];
            }
            if (lower_[i] > -kInf) {
                H(r, i) = -1.0;
                h[r++] = -lower_[i];
            }
        }
        return {H, h};
    }

private:
    Kind kind_ = Kind::Box;
    int dim_ = 0;
    Vec lower_, upper_;  // box form
    Mat H_;              // polytope form
    Vec h_;
};

}  // namespace gtmpc

#endif  // GTMPC_CONSTRAINTS_HPP

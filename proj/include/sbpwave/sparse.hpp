#pragma once

#include <span>
#include <vector>

#include "sbpwave/operators.hpp"

namespace sbpwave {

/// Compressed-row floating-point operator, built once from a rational matrix.
struct SparseOp {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    static SparseOp from_rational(const RationalMatrix& a, double scale) {
        SparseOp op;
        op.rows = a.rows();
        op.cols = a.cols();
        op.row_ptr.reserve(op.rows + 1);
        op.row_ptr.push_back(0);
        for (int r = 0; r < a.rows(); ++r) {
            for (int c = 0; c < a.cols(); ++c) {
                if (a(r, c).is_zero()) continue;
                op.col.push_back(c);
                op.val.push_back(a(r, c).to_double() * scale);
            }
            op.row_ptr.push_back(static_cast<int>(op.col.size()));
        }
        return op;
    }

    double at(int r, int c) const {
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            if (col[k] == c) return val[k];
        return 0.0;
    }

    void apply(std::span<const double> x, std::span<double> y) const {
        for (int r = 0; r < rows; ++r) {
            double s = 0.0;
            for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
            y[r] = s;
        }
    }
};

inline std::vector<double> to_doubles(const RationalVector& v, double scale = 1.0) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].to_double() * scale;
    return out;
}

}  // namespace sbpwave

#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mocoguard {

/// Dense row-major matrix of doubles. Vectors are 1 x c or r x 1 matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), data(std::move(values)) {
        assert(data.size() == r * c);
    }

    static Matrix row(std::span<const double> values) {
        return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
    }
    static Matrix column(std::span<const double> values) {
        return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
    }
    static Matrix from_rows(const std::vector<std::vector<double>>& rows_init) {
        Matrix m;
        m.rows = rows_init.size();
        m.cols = m.rows == 0 ? 0 : rows_init.front().size();
        for (const auto& r : rows_init) {
            assert(r.size() == m.cols);
            m.data.insert(m.data.end(), r.begin(), r.end());
        }
        return m;
    }
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows_init) {
        Matrix m;
        m.rows = rows_init.size();
        m.cols = m.rows == 0 ? 0 : rows_init.begin()->size();
        for (const auto& r : rows_init) {
            assert(r.size() == m.cols);
            m.data.insert(m.data.end(), r.begin(), r.end());
        }
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row_span(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row_span(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix&) const = default;
};

}  // namespace mocoguard

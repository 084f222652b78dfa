#include "gtl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gtl {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    if (!all_finite(values)) throw NonFiniteError(std::string(what) + " has a non-finite entry");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(op) + ": dim " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    }
}

}  // namespace

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------- Vector

Vector::Vector(std::vector<double> entries) : data_(std::move(entries)) {
    require_finite(data_, "vector");
}

Vector::Vector(std::initializer_list<double> entries) : data_(entries) {
    require_finite(data_, "vector");
}

Vector& Vector::operator+=(const Vector& other) {
    require_same_dim(*this, other, "vector +");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& other) {
    require_same_dim(*this, other, "vector -");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Vector& Vector::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector v) { return v *= s; }

double dot(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

double norm_sq(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double norm(const Vector& v) { return std::sqrt(norm_sq(v)); }

double distance_sq(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(const Vector& a, const Vector& b) { return std::sqrt(distance_sq(a, b)); }

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix: " + std::to_string(data_.size()) + " entries for shape " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(data_, "matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> entries;
    entries.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("matrix: ragged rows");
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(entries));
}

Matrix Matrix::from_columns(std::span<const Vector> columns) {
    const std::size_t c = columns.size();
    const std::size_t r = c == 0 ? 0 : columns[0].dim();
    Matrix m(r, c);
    for (std::size_t j = 0; j < c; ++j) {
        if (columns[j].dim() != r) throw DimensionError("matrix: columns of unequal dimension");
        for (std::size_t i = 0; i < r; ++i) m(i, j) = columns[j][i];
    }
    return m;
}

Vector Matrix::column(std::size_t c) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
    return v;
}

void Matrix::set_column(std::size_t c, const Vector& v) {
    if (v.dim() != rows_) throw DimensionError("set_column: dim mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, c) = v[i];
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "matrix +");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "matrix -");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        auto a_row = a.row(k);
        auto b_row = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a_row[i];
            if (aki == 0.0) continue;
            auto out_row = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto a_row = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            auto b_row = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a_row[k] * b_row[k];
            out(i, j) = s;
        }
    }
    return out;
}

Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols() != x.dim()) {
        throw DimensionError("matvec: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " * dim " + std::to_string(x.dim()));
    }
    Vector y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double s = 0.0;
        for (std::size_t k = 0; k < m.cols(); ++k) s += r[k] * x[k];
        y[i] = s;
    }
    return y;
}

Vector matvec_t(const Matrix& m, const Vector& x) {
    if (m.rows() != x.dim()) throw DimensionError("matvec_t: dim mismatch");
    Vector y(m.cols());
    for (std::size_t k = 0; k < m.rows(); ++k) {
        auto r = m.row(k);
        for (std::size_t i = 0; i < m.cols(); ++i) y[i] += r[i] * x[k];
    }
    return y;
}

double frobenius_norm_sq(const Matrix& m) {
    double s = 0.0;
    for (double v : m.span()) s += v * v;
    return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.span()[i] - b.span()[i]));
    return worst;
}

Vector relu(const Vector& v) {
    Vector out(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
    return out;
}

Matrix relu(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    auto src = m.span();
    auto dst = out.span();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
    return out;
}

Matrix solve(Matrix a, Matrix b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionError("solve: matrix is not square");
    if (b.rows() != n) throw DimensionError("solve: right-hand side has wrong row count");
    const std::size_t nrhs = b.cols();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        if (a(pivot, k) == 0.0) throw RangeError("solve: singular matrix");
        if (pivot != k) {
            std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(pivot).begin());
            std::swap_ranges(b.row(k).begin(), b.row(k).end(), b.row(pivot).begin());
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < nrhs; ++j) b(i, j) -= f * b(k, j);
        }
    }
    Matrix x(n, nrhs);
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = 0; j < nrhs; ++j) {
            double s = b(ii, j);
            for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
            x(ii, j) = s / a(ii, ii);
        }
    }
    return x;
}

// ---------------------------------------------------------------- Rng

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw RangeError("Rng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return r % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

Rng Rng::derive(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

Matrix he_init(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0) throw DimensionError("he_init: zero dimension");
    const double stddev = std::sqrt(2.0 / static_cast<double>(cols));
    Matrix m(rows, cols);
    for (double& v : m.span()) v = stddev * rng.normal();
    return m;
}

Vector gaussian_vector(std::size_t dim, double stddev, Rng& rng) {
    Vector v(dim);
    for (double& x : v) x = stddev * rng.normal();
    return v;
}

}  // namespace gtl

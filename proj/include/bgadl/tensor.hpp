#pragma once
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgadl {

// Dense row-major tensor of 64-bit reals. product(shape) == data.size() always.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s, double fill = 0.0);

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<std::size_t> s, double v) { return Tensor(std::move(s), v); }
    static Tensor scalar(double v) { return Tensor({1}, v); }
    static Tensor vec(std::initializer_list<double> vals);
    static Tensor from_rows(std::size_t rows, std::size_t cols, std::initializer_list<double> vals);

    std::size_t size() const { return data.size(); }
    std::size_t ndim() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    std::string shape_str() const;
};

void require_finite(const Tensor& t, const char* where);
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

// C = A(m×k) · B(k×n), optionally accumulating into C
void gemm(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = Aᵀ(k×m) · B(k×n)
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A(m×k) · Bᵀ(n×k)
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

} // namespace bgadl

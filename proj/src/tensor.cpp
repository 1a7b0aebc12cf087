#include "bgadl/tensor.hpp"

#include <cmath>

namespace bgadl {

Tensor::Tensor(std::vector<std::size_t> s, double fill) : shape(std::move(s)) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
        n *= d;
    }
    if (shape.empty()) n = 0;
    data.assign(n, fill);
}

Tensor Tensor::vec(std::initializer_list<double> vals) {
    Tensor t({vals.size()});
    std::size_t i = 0;
    for (double v : vals) t.data[i++] = v;
    return t;
}

Tensor Tensor::from_rows(std::size_t rows, std::size_t cols, std::initializer_list<double> vals) {
    if (vals.size() != rows * cols) throw std::invalid_argument("from_rows: value count mismatch");
    Tensor t({rows, cols});
    std::size_t i = 0;
    for (double v : vals) t.data[i++] = v;
    return t;
}

std::size_t Tensor::rows() const {
    if (shape.size() != 2) throw std::logic_error("rows(): tensor is not 2-d, shape " + shape_str());
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.size() != 2) throw std::logic_error("cols(): tensor is not 2-d, shape " + shape_str());
    return shape[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

void require_finite(const Tensor& t, const char* where) {
    if (!t.all_finite()) throw std::runtime_error(std::string(where) + ": non-finite value");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
}

namespace {
void check_mm(std::size_t ak, std::size_t bk, const char* where) {
    if (ak != bk) throw std::invalid_argument(std::string(where) + ": inner dimension mismatch");
}
} // namespace

void gemm(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    check_mm(k, b.rows(), "gemm");
    if (!accumulate || c.data.empty()) c = Tensor({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = &c.data[i * n];
        const double* arow = &a.data[i * k];
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = &b.data[p * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    check_mm(k, b.rows(), "gemm_tn");
    if (!accumulate || c.data.empty()) c = Tensor({m, n});
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = &a.data[p * m];
        const double* brow = &b.data[p * n];
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = &c.data[i * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    check_mm(k, b.cols(), "gemm_nt");
    if (!accumulate || c.data.empty()) c = Tensor({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = &a.data[i * k];
        double* crow = &c.data[i * n];
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = &b.data[j * k];
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

} // namespace bgadl

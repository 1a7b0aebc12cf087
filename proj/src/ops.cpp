#include "bgadl/ops.hpp"

#include <algorithm>
#include <cmath>

namespace bgadl {

namespace {

Tape& same_tape(Var x, Var y, const char* where) {
    if (!x.valid() || !y.valid() || x.tape != y.tape)
        throw std::invalid_argument(std::string(where) + ": vars not on one tape");
    return *x.tape;
}

Tape& tape_of(Var x, const char* where) {
    if (!x.valid()) throw std::invalid_argument(std::string(where) + ": invalid var");
    return *x.tape;
}

// elementwise binary op with same-shape contract
template <class Fwd, class Bwd>
Var ew_binary(Var x, Var y, const char* name, Fwd fwd, Bwd bwd) {
    Tape& t = same_tape(x, y, name);
    const Tensor& a = t.val(x);
    const Tensor& b = t.val(y);
    require_same_shape(a, b, name);
    Tensor out(a.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = fwd(a.data[i], b.data[i]);
    const int xi = x.id, yi = y.id;
    return t.emit(std::move(out), {xi, yi, -1}, [xi, yi, bwd](Tape& tp, int self) {
        const Tensor& g = tp.out_grad(self);
        const Tensor& a = tp.val(xi);
        const Tensor& b = tp.val(yi);
        if (tp.needs_grad(xi)) {
            Tensor& gx = tp.grad_slot(xi);
            for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i] * bwd(a.data[i], b.data[i], true);
        }
        if (tp.needs_grad(yi)) {
            Tensor& gy = tp.grad_slot(yi);
            for (std::size_t i = 0; i < g.data.size(); ++i) gy.data[i] += g.data[i] * bwd(a.data[i], b.data[i], false);
        }
    });
}

// elementwise unary op; derivative receives (input, output)
template <class Fwd, class Deriv>
Var ew_unary(Var x, const char* name, Fwd fwd, Deriv deriv) {
    Tape& t = tape_of(x, name);
    const Tensor& a = t.val(x);
    Tensor out(a.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = fwd(a.data[i]);
    const int xi = x.id;
    return t.emit(std::move(out), {xi, -1, -1}, [xi, deriv](Tape& tp, int self) {
        if (!tp.needs_grad(xi)) return;
        const Tensor& g = tp.out_grad(self);
        const Tensor& a = tp.val(xi);
        const Tensor& y = tp.val(self);
        Tensor& gx = tp.grad_slot(xi);
        for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i] * deriv(a.data[i], y.data[i]);
    });
}

} // namespace

Var add(Var x, Var y) {
    return ew_binary(x, y, "add", [](double a, double b) { return a + b; },
                     [](double, double, bool) { return 1.0; });
}

Var sub(Var x, Var y) {
    return ew_binary(x, y, "sub", [](double a, double b) { return a - b; },
                     [](double, double, bool first) { return first ? 1.0 : -1.0; });
}

Var mul(Var x, Var y) {
    return ew_binary(x, y, "mul", [](double a, double b) { return a * b; },
                     [](double a, double b, bool first) { return first ? b : a; });
}

Var scale(Var x, double c) {
    return ew_unary(x, "scale", [c](double a) { return c * a; }, [c](double, double) { return c; });
}

Var add_const(Var x, double c) {
    return ew_unary(x, "add_const", [c](double a) { return a + c; }, [](double, double) { return 1.0; });
}

Var tanh_v(Var x) {
    return ew_unary(x, "tanh", [](double a) { return std::tanh(a); },
                    [](double, double y) { return 1.0 - y * y; });
}

Var relu_v(Var x) {
    return ew_unary(x, "relu", [](double a) { return a > 0.0 ? a : 0.0; },
                    [](double a, double) { return a > 0.0 ? 1.0 : 0.0; });
}

Var exp_v(Var x) {
    return ew_unary(x, "exp", [](double a) { return std::exp(a); }, [](double, double y) { return y; });
}

Var log_v(Var x) {
    return ew_unary(x, "log", [](double a) { return std::log(a); }, [](double a, double) { return 1.0 / a; });
}

Var sigmoid_v(Var x) {
    return ew_unary(x, "sigmoid", [](double a) { return 1.0 / (1.0 + std::exp(-a)); },
                    [](double, double y) { return y * (1.0 - y); });
}

Var clamp_v(Var x, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
    return ew_unary(x, "clamp", [lo, hi](double a) { return std::min(hi, std::max(lo, a)); },
                    [lo, hi](double a, double) { return (a > lo && a < hi) ? 1.0 : 0.0; });
}

Var affine(Var x, Var w, Var b) {
    Tape& t = same_tape(x, w, "affine");
    same_tape(x, b, "affine");
    const Tensor& xv = t.val(x);
    const Tensor& wv = t.val(w);
    const Tensor& bv = t.val(b);
    if (xv.ndim() != 2 || wv.ndim() != 2 || bv.ndim() != 1)
        throw std::invalid_argument("affine: want x[B×N], W[N×M], b[M]");
    if (xv.cols() != wv.rows() || wv.cols() != bv.size())
        throw std::invalid_argument("affine: shape mismatch " + xv.shape_str() + " · " + wv.shape_str() +
                                    " + " + bv.shape_str());
    Tensor out;
    gemm(xv, wv, out);
    const std::size_t m = out.cols();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] += bv.data[j];
    const int xi = x.id, wi = w.id, bi = b.id;
    return t.emit(std::move(out), {xi, wi, bi}, [xi, wi, bi](Tape& tp, int self) {
        const Tensor& g = tp.out_grad(self);
        if (tp.needs_grad(xi)) gemm_nt(g, tp.val(wi), tp.grad_slot(xi), true);
        if (tp.needs_grad(wi)) gemm_tn(tp.val(xi), g, tp.grad_slot(wi), true);
        if (tp.needs_grad(bi)) {
            Tensor& gb = tp.grad_slot(bi);
            const std::size_t m = g.cols();
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < m; ++j) gb.data[j] += g.data[i * m + j];
        }
    });
}

Var softmax_rows_v(Var x) {
    Tape& t = tape_of(x, "softmax");
    Tensor out = softmax_rows(t.val(x));
    const int xi = x.id;
    return t.emit(std::move(out), {xi, -1, -1}, [xi](Tape& tp, int self) {
        if (!tp.needs_grad(xi)) return;
        const Tensor& g = tp.out_grad(self);
        const Tensor& s = tp.val(self);
        Tensor& gx = tp.grad_slot(xi);
        const std::size_t n = s.cols();
        for (std::size_t i = 0; i < s.rows(); ++i) {
            const double* srow = &s.data[i * n];
            const double* grow = &g.data[i * n];
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += srow[j] * grow[j];
            double* gxrow = &gx.data[i * n];
            for (std::size_t j = 0; j < n; ++j) gxrow[j] += srow[j] * (grow[j] - dot);
        }
    });
}

Var cross_entropy_mean(Var logits, const std::vector<int>& labels0) {
    Tape& t = tape_of(logits, "cross_entropy");
    const Tensor& l = t.val(logits);
    if (l.ndim() != 2) throw std::invalid_argument("cross_entropy: logits must be [B×C]");
    const std::size_t bsz = l.rows(), c = l.cols();
    if (labels0.size() != bsz) throw std::invalid_argument("cross_entropy: label count mismatch");
    for (int y : labels0)
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw std::invalid_argument("cross_entropy: label out of range");
    double loss = 0.0;
    for (std::size_t i = 0; i < bsz; ++i) {
        const double* row = &l.data[i * c];
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
        loss += mx + std::log(sum) - row[static_cast<std::size_t>(labels0[i])];
    }
    loss /= static_cast<double>(bsz);
    const int li = logits.id;
    return t.emit(Tensor::scalar(loss), {li, -1, -1}, [li, labels0](Tape& tp, int self) {
        if (!tp.needs_grad(li)) return;
        const double gs = tp.out_grad(self).data[0];
        const Tensor soft = softmax_rows(tp.val(li));
        Tensor& gx = tp.grad_slot(li);
        const std::size_t bsz = soft.rows(), c = soft.cols();
        const double inv_b = 1.0 / static_cast<double>(bsz);
        for (std::size_t i = 0; i < bsz; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                double d = soft.data[i * c + j] - (static_cast<std::size_t>(labels0[i]) == j ? 1.0 : 0.0);
                gx.data[i * c + j] += gs * d * inv_b;
            }
    });
}

Var sum_all(Var x) {
    Tape& t = tape_of(x, "sum_all");
    const Tensor& a = t.val(x);
    double s = 0.0;
    for (double v : a.data) s += v;
    const int xi = x.id;
    return t.emit(Tensor::scalar(s), {xi, -1, -1}, [xi](Tape& tp, int self) {
        if (!tp.needs_grad(xi)) return;
        const double gs = tp.out_grad(self).data[0];
        Tensor& gx = tp.grad_slot(xi);
        for (double& v : gx.data) v += gs;
    });
}

Var mean_all(Var x) {
    Tape& t = tape_of(x, "mean_all");
    const std::size_t n = t.val(x).size();
    if (n == 0) throw std::invalid_argument("mean_all: empty tensor");
    return scale(sum_all(x), 1.0 / static_cast<double>(n));
}

Var concat_cols(Var x, Var y) {
    Tape& t = same_tape(x, y, "concat_cols");
    const Tensor& a = t.val(x);
    const Tensor& b = t.val(y);
    if (a.ndim() != 2 || b.ndim() != 2 || a.rows() != b.rows())
        throw std::invalid_argument("concat_cols: want same-row 2-d tensors");
    const std::size_t r = a.rows(), n = a.cols(), m = b.cols();
    Tensor out({r, n + m});
    for (std::size_t i = 0; i < r; ++i) {
        std::copy_n(&a.data[i * n], n, &out.data[i * (n + m)]);
        std::copy_n(&b.data[i * m], m, &out.data[i * (n + m) + n]);
    }
    const int xi = x.id, yi = y.id;
    return t.emit(std::move(out), {xi, yi, -1}, [xi, yi, n, m, r](Tape& tp, int self) {
        const Tensor& g = tp.out_grad(self);
        if (tp.needs_grad(xi)) {
            Tensor& gx = tp.grad_slot(xi);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < n; ++j) gx.data[i * n + j] += g.data[i * (n + m) + j];
        }
        if (tp.needs_grad(yi)) {
            Tensor& gy = tp.grad_slot(yi);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < m; ++j) gy.data[i * m + j] += g.data[i * (n + m) + n + j];
        }
    });
}

Var embed_rows(Var table, const std::vector<int>& labels0) {
    Tape& t = tape_of(table, "embed_rows");
    const Tensor& tb = t.val(table);
    if (tb.ndim() != 2) throw std::invalid_argument("embed_rows: table must be [C×E]");
    const std::size_t c = tb.rows(), e = tb.cols();
    for (int y : labels0)
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw std::invalid_argument("embed_rows: label out of range");
    Tensor out({labels0.size(), e});
    for (std::size_t i = 0; i < labels0.size(); ++i)
        std::copy_n(&tb.data[static_cast<std::size_t>(labels0[i]) * e], e, &out.data[i * e]);
    const int ti = table.id;
    return t.emit(std::move(out), {ti, -1, -1}, [ti, labels0, e](Tape& tp, int self) {
        if (!tp.needs_grad(ti)) return;
        const Tensor& g = tp.out_grad(self);
        Tensor& gt = tp.grad_slot(ti);
        for (std::size_t i = 0; i < labels0.size(); ++i)
            for (std::size_t j = 0; j < e; ++j)
                gt.data[static_cast<std::size_t>(labels0[i]) * e + j] += g.data[i * e + j];
    });
}

namespace {

Tensor draw_dropout_mask(const std::vector<std::size_t>& shape, double rate, RngStream& stream) {
    Tensor mask(shape);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : mask.data) v = stream.uniform() >= rate ? keep_scale : 0.0;
    return mask;
}

void check_dropout_rate(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
}

} // namespace

Var dropout(Var x, DropoutSpec spec, RngStream stream) {
    check_dropout_rate(spec.rate);
    Tape& t = tape_of(x, "dropout");
    if (spec.mode == DropoutMode::DeterministicOff || spec.rate == 0.0) return x;
    const Tensor& a = t.val(x);
    Tensor mask = draw_dropout_mask(a.shape, spec.rate, stream);
    Tensor out(a.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] * mask.data[i];
    const int xi = x.id;
    return t.emit(std::move(out), {xi, -1, -1}, [xi, mask](Tape& tp, int self) {
        if (!tp.needs_grad(xi)) return;
        const Tensor& g = tp.out_grad(self);
        Tensor& gx = tp.grad_slot(xi);
        for (std::size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i] * mask.data[i];
    });
}

Var reparam_gaussian(Var mu, Var log_var, RngStream stream) {
    Tape& t = same_tape(mu, log_var, "reparam_gaussian");
    const Tensor& m = t.val(mu);
    Tensor eta(m.shape);
    for (double& v : eta.data) v = stream.gaussian();
    return reparam_gaussian_with(mu, log_var, std::move(eta));
}

Var reparam_gaussian_with(Var mu, Var log_var, Tensor eta) {
    Tape& t = same_tape(mu, log_var, "reparam_gaussian");
    require_same_shape(t.val(mu), t.val(log_var), "reparam_gaussian");
    require_same_shape(t.val(mu), eta, "reparam_gaussian");
    Var eta_c = t.constant(std::move(eta));
    return add(mu, mul(exp_v(scale(log_var, 0.5)), eta_c));
}

Var mse_mean(Var a, Var b) {
    Var d = sub(a, b);
    return mean_all(mul(d, d));
}

// ---- plain helpers ----

Tensor affine_plain(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.ndim() != 2 || w.ndim() != 2 || b.ndim() != 1)
        throw std::invalid_argument("affine: want x[B×N], W[N×M], b[M]");
    if (x.cols() != w.rows() || w.cols() != b.size()) throw std::invalid_argument("affine: shape mismatch");
    Tensor out;
    gemm(x, w, out);
    const std::size_t m = out.cols();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] += b.data[j];
    return out;
}

void relu_inplace(Tensor& t) {
    for (double& v : t.data) v = v > 0.0 ? v : 0.0;
}

void tanh_inplace(Tensor& t) {
    for (double& v : t.data) v = std::tanh(v);
}

void sigmoid_inplace(Tensor& t) {
    for (double& v : t.data) v = 1.0 / (1.0 + std::exp(-v));
}

Tensor softmax_rows(const Tensor& x) {
    if (x.ndim() != 2) throw std::invalid_argument("softmax: want [B×C]");
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(x.shape);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = &x.data[i * c];
        double* orow = &out.data[i * c];
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (std::size_t j = 0; j < c; ++j) orow[j] /= sum;
    }
    return out;
}

Tensor dropout_apply(const Tensor& x, DropoutSpec spec, RngStream stream) {
    check_dropout_rate(spec.rate);
    if (spec.mode == DropoutMode::DeterministicOff || spec.rate == 0.0) return x;
    Tensor mask = draw_dropout_mask(x.shape, spec.rate, stream);
    Tensor out(x.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x.data[i] * mask.data[i];
    return out;
}

} // namespace bgadl

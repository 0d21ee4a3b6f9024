#include "core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/error.hpp"

namespace clhoi::ops {

namespace {

using Inputs = std::span<const Tensor* const>;
using GradIn = std::span<std::vector<double>* const>;

void check_rank2(const Var& a, const char* op) {
  require(a.valid(), ErrorKind::kUsage, std::string(op) + ": unbound input");
  require(a.value().rank() == 2, ErrorKind::kDimension,
          std::string(op) + ": expected rank-2 operand, got " + shape_str(a.value().shape()));
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  check_rank2(a, op);
  check_rank2(b, op);
  require(a.value().shape() == b.value().shape(), ErrorKind::kDimension,
          std::string(op) + ": shape mismatch " + shape_str(a.value().shape()) + " vs " +
              shape_str(b.value().shape()));
}

Tensor make(std::size_t rows, std::size_t cols, std::vector<double> data, const char* op) {
  if (!all_finite(data)) fail(ErrorKind::kNumeric, std::string(op) + " produced a non-finite value");
  return Tensor({rows, cols}, std::move(data));
}

// Elementwise unary op with derivative expressed via (x, y).
template <typename F, typename D>
Var unary(Var a, const char* op, F f, D dfdx) {
  check_rank2(a, op);
  const Tensor& x = a.value();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x.data()[i]);
  Tensor out = make(x.rows(), x.cols(), std::move(y), op);
  return a.tape().record(std::move(out), {a},
                         [dfdx](const Tensor& g, const Tensor& out, Inputs in, GradIn gin) {
                           if (!gin[0]) return;
                           auto& ga = *gin[0];
                           const auto xs = in[0]->data();
                           const auto ys = out.data();
                           for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g.data()[i] * dfdx(xs[i], ys[i]);
                         },
                         op);
}

void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
              bool ta, bool tb) {
  // c[m x n] += op(a)[m x k] * op(b)[k x n]
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ta ? a[p * m + i] : a[i * k + p];
      if (av == 0.0) continue;
      if (!tb) {
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
      }
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require(x.cols() == y.rows(), ErrorKind::kDimension,
          "matmul: " + shape_str(x.shape()) + " x " + shape_str(y.shape()));
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  std::vector<double> out(m * n, 0.0);
  gemm_acc(x.data().data(), y.data().data(), out.data(), m, k, n, false, false);
  return a.tape().record(make(m, n, std::move(out), "matmul"), {a, b},
                         [m, k, n](const Tensor& g, const Tensor&, Inputs in, GradIn gin) {
                           if (gin[0]) gemm_acc(g.data().data(), in[1]->data().data(), gin[0]->data(), m, n, k, false, true);
                           if (gin[1]) gemm_acc(in[0]->data().data(), g.data().data(), gin[1]->data(), k, m, n, true, false);
                         },
                         "matmul");
}

Var transpose(Var a) {
  check_rank2(a, "transpose");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x(i, j);
  return a.tape().record(make(c, r, std::move(out), "transpose"), {a},
                         [r, c](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           auto& ga = *gin[0];
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g.data()[j * r + i];
                         },
                         "transpose");
}

namespace {

template <typename F>
Var binary(Var a, Var b, const char* op, F f, double sign_b) {
  check_same_shape(a, b, op);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x.data()[i], y.data()[i]);
  return a.tape().record(make(x.rows(), x.cols(), std::move(out), op), {a, b},
                         [sign_b](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (gin[0])
                             for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g.data()[i];
                           if (gin[1])
                             for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] += sign_b * g.data()[i];
                         },
                         op);
}

}  // namespace

Var add(Var a, Var b) {
  return binary(a, b, "add", [](double x, double y) { return x + y; }, 1.0);
}

Var sub(Var a, Var b) {
  return binary(a, b, "sub", [](double x, double y) { return x - y; }, -1.0);
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * y.data()[i];
  return a.tape().record(make(x.rows(), x.cols(), std::move(out), "mul"), {a, b},
                         [](const Tensor& g, const Tensor&, Inputs in, GradIn gin) {
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             if (gin[0]) (*gin[0])[i] += g.data()[i] * in[1]->data()[i];
                             if (gin[1]) (*gin[1])[i] += g.data()[i] * in[0]->data()[i];
                           }
                         },
                         "mul");
}

Var scale(Var a, double factor) {
  return unary(a, "scale", [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double offset) {
  return unary(a, "add_scalar", [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var add_row(Var a, Var row) {
  check_rank2(a, "add_row");
  check_rank2(row, "add_row");
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  require(r.rows() == 1 && r.cols() == x.cols(), ErrorKind::kDimension,
          "add_row: " + shape_str(x.shape()) + " + " + shape_str(r.shape()));
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += r.data()[j];
  return a.tape().record(make(n, c, std::move(out), "add_row"), {a, row},
                         [n, c](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (gin[0])
                             for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g.data()[i];
                           if (gin[1])
                             for (std::size_t i = 0; i < n; ++i)
                               for (std::size_t j = 0; j < c; ++j) (*gin[1])[j] += g.data()[i * c + j];
                         },
                         "add_row");
}

Var mul_row(Var a, Var row) {
  check_rank2(a, "mul_row");
  check_rank2(row, "mul_row");
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  require(r.rows() == 1 && r.cols() == x.cols(), ErrorKind::kDimension,
          "mul_row: " + shape_str(x.shape()) + " * " + shape_str(r.shape()));
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x.data()[i * c + j] * r.data()[j];
  return a.tape().record(make(n, c, std::move(out), "mul_row"), {a, row},
                         [n, c](const Tensor& g, const Tensor&, Inputs in, GradIn gin) {
                           for (std::size_t i = 0; i < n; ++i)
                             for (std::size_t j = 0; j < c; ++j) {
                               const double gij = g.data()[i * c + j];
                               if (gin[0]) (*gin[0])[i * c + j] += gij * in[1]->data()[j];
                               if (gin[1]) (*gin[1])[j] += gij * in[0]->data()[i * c + j];
                             }
                         },
                         "mul_row");
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), ErrorKind::kUsage, "concat_rows: no inputs");
  const std::size_t c = parts.front().value().cols();
  std::size_t rows = 0;
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (const Var& p : parts) {
    check_rank2(p, "concat_rows");
    require(p.value().cols() == c, ErrorKind::kDimension,
            "concat_rows: column mismatch " + shape_str(parts.front().value().shape()) + " vs " +
                shape_str(p.value().shape()));
    rows += p.value().rows();
    out.insert(out.end(), p.value().data().begin(), p.value().data().end());
    sizes.push_back(p.value().size());
  }
  return parts.front().tape().record(make(rows, c, std::move(out), "concat_rows"), parts,
                                     [sizes](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                                       std::size_t off = 0;
                                       for (std::size_t p = 0; p < sizes.size(); ++p) {
                                         if (gin[p])
                                           for (std::size_t i = 0; i < sizes[p]; ++i) (*gin[p])[i] += g.data()[off + i];
                                         off += sizes[p];
                                       }
                                     },
                                     "concat_rows");
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), ErrorKind::kUsage, "concat_cols: no inputs");
  const std::size_t r = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    check_rank2(p, "concat_cols");
    require(p.value().rows() == r, ErrorKind::kDimension,
            "concat_cols: row mismatch " + shape_str(parts.front().value().shape()) + " vs " +
                shape_str(p.value().shape()));
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  std::vector<double> out(r * total);
  std::size_t off = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& x = parts[p].value();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(i * widths[p]), widths[p],
                  out.begin() + static_cast<std::ptrdiff_t>(i * total + off));
    off += widths[p];
  }
  return parts.front().tape().record(make(r, total, std::move(out), "concat_cols"), parts,
                                     [r, total, widths](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                                       std::size_t off = 0;
                                       for (std::size_t p = 0; p < widths.size(); ++p) {
                                         if (gin[p])
                                           for (std::size_t i = 0; i < r; ++i)
                                             for (std::size_t j = 0; j < widths[p]; ++j)
                                               (*gin[p])[i * widths[p] + j] += g.data()[i * total + off + j];
                                         off += widths[p];
                                       }
                                     },
                                     "concat_cols");
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  check_rank2(a, "slice_rows");
  const Tensor& x = a.value();
  require(count > 0 && begin + count <= x.rows(), ErrorKind::kDimension,
          "slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + shape_str(x.shape()));
  const std::size_t c = x.cols();
  std::vector<double> out(x.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                          x.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * c));
  return a.tape().record(make(count, c, std::move(out), "slice_rows"), {a},
                         [begin, c](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[begin * c + i] += g.data()[i];
                         },
                         "slice_rows");
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  check_rank2(a, "slice_cols");
  const Tensor& x = a.value();
  require(count > 0 && begin + count <= x.cols(), ErrorKind::kDimension,
          "slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + shape_str(x.shape()));
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * count);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x(i, begin + j);
  return a.tape().record(make(r, count, std::move(out), "slice_cols"), {a},
                         [r, c, begin, count](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < count; ++j) (*gin[0])[i * c + begin + j] += g.data()[i * count + j];
                         },
                         "slice_cols");
}

Var gather_rows(Var a, const std::vector<std::size_t>& indices) {
  check_rank2(a, "gather_rows");
  const Tensor& x = a.value();
  require(!indices.empty(), ErrorKind::kDimension, "gather_rows: empty index list");
  const std::size_t c = x.cols();
  std::vector<double> out;
  out.reserve(indices.size() * c);
  for (std::size_t idx : indices) {
    require(idx < x.rows(), ErrorKind::kDimension,
            "gather_rows: index " + std::to_string(idx) + " out of " + shape_str(x.shape()));
    const auto row = x.data().subspan(idx * c, c);
    out.insert(out.end(), row.begin(), row.end());
  }
  return a.tape().record(make(indices.size(), c, std::move(out), "gather_rows"), {a},
                         [indices, c](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (std::size_t i = 0; i < indices.size(); ++i)
                             for (std::size_t j = 0; j < c; ++j) (*gin[0])[indices[i] * c + j] += g.data()[i * c + j];
                         },
                         "gather_rows");
}

Var sum(Var a) {
  check_rank2(a, "sum");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(make(1, 1, {s}, "sum"), {a},
                         [](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (double& v : *gin[0]) v += g.data()[0];
                         },
                         "sum");
}

Var mean(Var a) {
  check_rank2(a, "mean");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mean_rows(Var a) {
  check_rank2(a, "mean_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(c, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += x(i, j);
  for (double& v : out) v /= static_cast<double>(r);
  return a.tape().record(make(1, c, std::move(out), "mean_rows"), {a},
                         [r, c](const Tensor& g, const Tensor&, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           const double inv = 1.0 / static_cast<double>(r);
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < c; ++j) (*gin[0])[i * c + j] += g.data()[j] * inv;
                         },
                         "mean_rows");
}

Var softmax_rows(Var a) {
  check_rank2(a, "softmax_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = x(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (out[i * c + j] = std::exp(x(i, j) - mx));
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return a.tape().record(make(r, c, std::move(out), "softmax_rows"), {a},
                         [r, c](const Tensor& g, const Tensor& y, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (std::size_t i = 0; i < r; ++i) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < c; ++j) dot += g(i, j) * y(i, j);
                             for (std::size_t j = 0; j < c; ++j) (*gin[0])[i * c + j] += y(i, j) * (g(i, j) - dot);
                           }
                         },
                         "softmax_rows");
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid",
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  check_rank2(a, "log");
  for (double v : a.value().data())
    require(v > 0.0, ErrorKind::kDomain, "log of non-positive value " + std::to_string(v));
  return unary(a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var pow(Var a, double exponent) {
  check_rank2(a, "pow");
  const bool integral = std::floor(exponent) == exponent;
  for (double v : a.value().data()) {
    require(integral || v > 0.0 || (v == 0.0 && exponent >= 1.0), ErrorKind::kDomain,
            "pow: base " + std::to_string(v) + " with exponent " + std::to_string(exponent));
  }
  return unary(
      a, "pow", [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) { return exponent == 0.0 ? 0.0 : exponent * std::pow(x, exponent - 1.0); });
}

Var gelu(Var a) {
  // tanh approximation; smooth everywhere.
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c3 = 0.044715;
  return unary(
      a, "gelu",
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + c3 * x * x * x))); },
      [](double x, double) {
        const double u = k * (x + c3 * x * x * x);
        const double t = std::tanh(u);
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * k * (1.0 + 3.0 * c3 * x * x);
      });
}

Var l2_normalize_rows(Var a) {
  check_rank2(a, "l2_normalize_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> norms(r);
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += x(i, j) * x(i, j);
    norms[i] = std::sqrt(s);
    require(norms[i] > 0.0, ErrorKind::kDomain, "l2_normalize_rows: zero-norm row " + std::to_string(i));
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x(i, j) / norms[i];
  }
  return a.tape().record(make(r, c, std::move(out), "l2_normalize_rows"), {a},
                         [r, c, norms](const Tensor& g, const Tensor& y, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           for (std::size_t i = 0; i < r; ++i) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < c; ++j) dot += g(i, j) * y(i, j);
                             for (std::size_t j = 0; j < c; ++j)
                               (*gin[0])[i * c + j] += (g(i, j) - y(i, j) * dot) / norms[i];
                           }
                         },
                         "l2_normalize_rows");
}

Var layer_norm_rows(Var a, double eps) {
  check_rank2(a, "layer_norm_rows");
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> inv_std(r);
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += x(i, j);
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (x(i, j) - mu) * (x(i, j) - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (x(i, j) - mu) * inv_std[i];
  }
  return a.tape().record(make(r, c, std::move(out), "layer_norm_rows"), {a},
                         [r, c, inv_std](const Tensor& g, const Tensor& y, Inputs, GradIn gin) {
                           if (!gin[0]) return;
                           const double n = static_cast<double>(c);
                           for (std::size_t i = 0; i < r; ++i) {
                             double gsum = 0.0, gy = 0.0;
                             for (std::size_t j = 0; j < c; ++j) {
                               gsum += g(i, j);
                               gy += g(i, j) * y(i, j);
                             }
                             for (std::size_t j = 0; j < c; ++j)
                               (*gin[0])[i * c + j] += inv_std[i] * (g(i, j) - gsum / n - y(i, j) * gy / n);
                           }
                         },
                         "layer_norm_rows");
}

Var clamp(Var a, double lo, double hi) {
  require(lo <= hi, ErrorKind::kUsage, "clamp: lo > hi");
  return unary(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var cosine(Var a, Var b) { return matmul(l2_normalize_rows(a), transpose(l2_normalize_rows(b))); }

}  // namespace clhoi::ops

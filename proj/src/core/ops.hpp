#pragma once

#include <cstddef>
#include <vector>

#include "core/tape.hpp"

// Differentiable primitives over rank-2 tensors. Broadcasting is limited to
// scalars and the explicitly named row-vector ops (add_row, mul_row).
namespace clhoi::ops {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var add_row(Var a, Var row);  // a[i,:] + row
Var mul_row(Var a, Var row);  // a[i,:] * row

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, const std::vector<std::size_t>& indices);

Var sum(Var a);        // 1x1
Var mean(Var a);       // 1x1
Var mean_rows(Var a);  // 1xC: average of the rows

Var softmax_rows(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var pow(Var a, double exponent);
Var gelu(Var a);
Var l2_normalize_rows(Var a);
Var layer_norm_rows(Var a, double eps = 1e-5);
Var clamp(Var a, double lo, double hi);

// Row-wise cosine similarity matrix: normalize(a) * normalize(b)^T.
Var cosine(Var a, Var b);

}  // namespace clhoi::ops

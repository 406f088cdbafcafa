#pragma once

#include <algorithm>

namespace bh::detail {

template <class T>
void mul_schoolbook(std::span<const T> a, std::span<const T> b, std::span<T> out) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
}

// out must be zero-initialised with size a.size() + b.size() - 1.
template <class T>
void mul_into(std::span<const T> a, std::span<const T> b, std::span<T> out, std::size_t threshold) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t na = a.size(), nb = b.size();
  if (nb < threshold) {
    mul_schoolbook(a, b, out);
    return;
  }
  if (na >= 2 * nb) {
    // Unbalanced: slice the long operand into nb-sized blocks.
    std::vector<T> tmp(2 * nb - 1);
    for (std::size_t off = 0; off < na; off += nb) {
      const std::size_t len = std::min(nb, na - off);
      std::fill(tmp.begin(), tmp.end(), T());
      std::span<T> tspan(tmp.data(), len + nb - 1);
      mul_into<T>(a.subspan(off, len), b, tspan, threshold);
      for (std::size_t k = 0; k < tspan.size(); ++k) out[off + k] += tspan[k];
    }
    return;
  }
  const std::size_t m = nb / 2;
  auto a0 = a.first(m), a1 = a.subspan(m);
  auto b0 = b.first(m), b1 = b.subspan(m);

  std::vector<T> z0(2 * m - 1), z2(a1.size() + b1.size() - 1);
  mul_into<T>(a0, b0, z0, threshold);
  mul_into<T>(a1, b1, z2, threshold);

  std::vector<T> sa(a1.size()), sb(b1.size());
  for (std::size_t i = 0; i < a1.size(); ++i) sa[i] = a1[i] + (i < m ? a0[i] : T());
  for (std::size_t i = 0; i < b1.size(); ++i) sb[i] = b1[i] + (i < m ? b0[i] : T());
  std::vector<T> z1(sa.size() + sb.size() - 1);
  mul_into<T>(std::span<const T>(sa), std::span<const T>(sb), z1, threshold);
  for (std::size_t i = 0; i < z0.size(); ++i) z1[i] -= z0[i];
  for (std::size_t i = 0; i < z2.size(); ++i) z1[i] -= z2[i];

  for (std::size_t i = 0; i < z0.size(); ++i) out[i] += z0[i];
  for (std::size_t i = 0; i < z1.size() && m + i < out.size(); ++i) out[m + i] += z1[i];
  for (std::size_t i = 0; i < z2.size(); ++i) out[2 * m + i] += z2[i];
}

template <class T>
std::vector<T> poly_mul(std::span<const T> a, std::span<const T> b, std::size_t threshold) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> out(a.size() + b.size() - 1);
  mul_into<T>(a, b, std::span<T>(out), std::max<std::size_t>(threshold, 2));
  return out;
}

}  // namespace bh::detail

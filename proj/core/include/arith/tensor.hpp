#pragma once

#include <cblas.h>

#include <cstddef>
#include <new>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace arith {

// 64-byte aligned storage so BLAS kernels always see the same pointer
// alignment; unaligned buffers can round differently and break
// bit-exact checkpoint resume.
template <class T>
struct AlignedAlloc {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAlloc() = default;
  template <class U>
  AlignedAlloc(const AlignedAlloc<U>&) {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = ::operator new(n * sizeof(T), std::align_val_t(kAlign));
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t n) {
    ::operator delete(p, n * sizeof(T), std::align_val_t(kAlign));
  }
  template <class U>
  bool operator==(const AlignedAlloc<U>&) const {
    return true;
  }
};

template <class Real>
using AlignedVec = std::vector<Real, AlignedAlloc<Real>>;

template <class Real>
struct Tensor {
  AlignedVec<Real> v;
  std::vector<int> shape;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(), Real(0));
  }

  std::size_t count() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  Real* data() { return v.data(); }
  const Real* data() const { return v.data(); }
  void zero() { std::fill(v.begin(), v.end(), Real(0)); }
};

// Row-major C = alpha * op(A) * op(B) + beta * C.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                 const float* a, int lda, const float* b, int ldb, float beta,
                 float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
                 const double* a, int lda, const double* b, int ldb,
                 double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

}  // namespace arith

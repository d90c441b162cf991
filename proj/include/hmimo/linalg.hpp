// hmimo: DFT-based channel estimation for holographic MIMO uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmimo/fft.hpp"

namespace hmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Thrown when a solve meets a reciprocal-condition estimate below the
/// cutoff (callers decide whether and how to regularize).
class SingularMatrixError : public std::runtime_error {
  public:
    SingularMatrixError(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const { return rcond_; }

  private:
    double rcond_;
};

class NotPsdError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

inline bool is_hermitian(const CMatrix& m, double rel_tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    const double scale = m.norm();
    return (m - m.adjoint()).norm() <= rel_tol * (scale > 0.0 ? scale : 1.0);
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Satisfies U diag(lambda) U^H = input and U^H U = I to 1e-10 relative.
struct HermitianEvd {
    RVector eigenvalues;   // descending
    CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

inline HermitianEvd hermitian_evd(const CMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_evd: matrix not square");
    if (!is_hermitian(m)) throw std::invalid_argument("hermitian_evd: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
    if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_evd: solver failed");
    HermitianEvd out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

/// Unitary DFT of a complex vector. The "forward" direction multiplies by
/// F^H where [F]_{m,n} = e^{+j 2 pi m n / N} / sqrt(N), i.e. applies the
/// kernel e^{-j 2 pi m n / N} / sqrt(N); "inverse" multiplies by F itself.
/// Round trip and Parseval hold to 1e-12 relative for any N >= 1.
enum class DftDirection { forward, inverse };

inline CVector dft_unitary(const CVector& v, DftDirection dir) {
    const auto n = static_cast<std::size_t>(v.size());
    if (n == 0) throw std::invalid_argument("dft_unitary: empty vector");
    Fft plan(n);
    CVector out = v;
    if (dir == DftDirection::forward)
        plan.forward(out.data());
    else
        plan.inverse(out.data());
    out *= 1.0 / std::sqrt(static_cast<double>(n));
    return out;
}

/// Square-root factor S with S S^H = m, via eigen-decomposition.
/// Eigenvalues in [-clamp_tol * lambda_max, 0) are clamped to zero; anything
/// below that window raises NotPsdError.
inline CMatrix psd_factor(const CMatrix& m, double clamp_tol = 1e-10) {
    HermitianEvd evd = hermitian_evd(m);
    const double lmax = evd.eigenvalues.size() > 0 ? std::max(evd.eigenvalues(0), 0.0) : 0.0;
    const double floor = -clamp_tol * lmax;
    RVector lam = evd.eigenvalues;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < floor)
            throw NotPsdError("psd_factor: eigenvalue " + std::to_string(lam(i)) +
                              " below clamp window " + std::to_string(floor));
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    return evd.eigenvectors * lam.cwiseSqrt().asDiagonal();
}

/// Solves m x = rhs for Hermitian m. Tries Cholesky first (covers the
/// positive-definite Q = R + I/gamma of the perfect-statistics path) and
/// falls back to partial-pivot LU for indefinite estimated covariances.
/// Throws SingularMatrixError when the reciprocal condition estimate of the
/// factorization drops below `rcond_cutoff`; the caller owns any loading policy.
inline CMatrix solve_hermitian(const CMatrix& m, const CMatrix& rhs,
                               double rcond_cutoff = 1e-14) {
    if (m.rows() != m.cols()) throw std::invalid_argument("solve_hermitian: matrix not square");
    if (m.rows() != rhs.rows()) throw std::invalid_argument("solve_hermitian: rhs rows mismatch");
    if (!is_hermitian(m)) throw std::invalid_argument("solve_hermitian: matrix not Hermitian");

    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() == Eigen::Success) {
        const double rc = llt.rcond();
        if (rc <= rcond_cutoff)
            throw SingularMatrixError("solve_hermitian: ill-conditioned (rcond estimate " +
                                          std::to_string(rc) + ")",
                                      rc);
        return llt.solve(rhs);
    }
    Eigen::PartialPivLU<CMatrix> lu(m);
    // Norm-based estimate plus a pivot-ratio guard; the latter catches exact
    // singularity where the norm estimate is unreliable.
    const RVector pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pmax = pivots.maxCoeff();
    const double pivot_ratio = pmax > 0.0 ? pivots.minCoeff() / pmax : 0.0;
    const double rc = std::min(lu.rcond(), pivot_ratio);
    if (!(rc > rcond_cutoff))
        throw SingularMatrixError("solve_hermitian: ill-conditioned (rcond estimate " +
                                      std::to_string(rc) + ")",
                                  rc);
    CMatrix x = lu.solve(rhs);
    if (!x.allFinite())
        throw SingularMatrixError("solve_hermitian: non-finite solution", rc);
    return x;
}

}  // namespace hmimo

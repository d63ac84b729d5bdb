// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace irsnoma {

namespace {

void require_square(const CMatrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

// Shifted power iteration fallback for the Perron pair.  The shift separates
// eigenvalues of equal modulus and opposite sign.
bool power_iteration(const RMatrix& a, double& value, RVector& vec) {
    const Eigen::Index n = a.rows();
    double shift = 1e-3 * a.cwiseAbs().colwise().sum().maxCoeff() + 1e-300;
    RMatrix b = a + shift * RMatrix::Identity(n, n);
    RVector v = RVector::Ones(n) / std::sqrt(double(n));
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        RVector w = b * v;
        double nw = w.norm();
        if (!(nw > 0.0) || !std::isfinite(nw)) return false;
        w /= nw;
        double l = v.dot(b * v) / v.squaredNorm();
        if ((w - v).lpNorm<Eigen::Infinity>() < 1e-15 && std::abs(l - lambda) <= 1e-15 * std::abs(l)) {
            v = w;
            lambda = l;
            break;
        }
        v = w;
        lambda = l;
    }
    v = v.cwiseMax(0.0);
    double nv = v.norm();
    if (!(nv > 0.0)) return false;
    v /= nv;
    value = lambda - shift;
    vec = v;
    return true;
}

}  // namespace

EigenDecomposition hermitian_eig(const CMatrix& a) {
    require_square(a, "hermitian_eig");
    const Eigen::Index n = a.rows();
    double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver failed");

    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
        return es.eigenvalues()(i) > es.eigenvalues()(j);
    });
    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = es.eigenvalues()(idx[k]);
        out.eigenvectors.col(k) = es.eigenvectors().col(idx[k]);
    }
    return out;
}

DominantEigpair dominant_eigpair(const RMatrix& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("dominant_eigpair: matrix must be square");
    if ((a.array() < 0.0).any())
        throw std::invalid_argument("dominant_eigpair: entries must be nonnegative");
    const Eigen::Index n = a.rows();
    double amax = a.maxCoeff();

    double value = 0.0;
    RVector v;
    if (amax == 0.0) {
        value = 0.0;
        v = RVector::Zero(n);
        v(n - 1) = 1.0;
        return {value, v};
    }

    bool ok = false;
    Eigen::EigenSolver<RMatrix> es(a);
    if (es.info() == Eigen::Success) {
        // The spectral radius of a nonnegative matrix is itself an eigenvalue,
        // and it is the unique eigenvalue of maximal real part.
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            double dr = es.eigenvalues()(i).real() - es.eigenvalues()(best).real();
            if (dr > 0.0 || (dr == 0.0 && std::abs(es.eigenvalues()(i).imag()) <
                                              std::abs(es.eigenvalues()(best).imag())))
                best = i;
        }
        CVector w = es.eigenvectors().col(best);
        Eigen::Index m;
        w.cwiseAbs().maxCoeff(&m);
        w *= std::polar(1.0, -std::arg(w(m)));
        RVector re = w.real();
        double resid_im = w.imag().cwiseAbs().maxCoeff();
        if (re.sum() < 0.0) re = -re;
        double vmax = re.cwiseAbs().maxCoeff();
        if (resid_im <= 1e-9 * vmax && re.minCoeff() >= -1e-9 * vmax) {
            v = re.cwiseMax(0.0);
            v /= v.norm();
            value = es.eigenvalues()(best).real();
            ok = true;
        }
    }
    if (!ok) ok = power_iteration(a, value, v);
    if (!ok) throw NumericalError("dominant_eigpair: iteration failed to converge");

    double vinf = v.lpNorm<Eigen::Infinity>();
    double resid = (a * v - value * v).lpNorm<Eigen::Infinity>();
    if (resid > 1e-9 * std::max(std::abs(value) * vinf, 1e-300)) {
        if (!power_iteration(a, value, v))
            throw NumericalError("dominant_eigpair: residual tolerance not met");
        vinf = v.lpNorm<Eigen::Infinity>();
        resid = (a * v - value * v).lpNorm<Eigen::Infinity>();
        if (resid > 1e-9 * std::max(std::abs(value) * vinf, 1e-300))
            throw NumericalError("dominant_eigpair: residual tolerance not met");
    }

    if (std::abs(v(n - 1)) > 1e-12 * vinf)
        v /= v(n - 1);
    else
        v /= vinf;
    return {value, v};
}

int numerical_rank(const CMatrix& a, double tol) {
    if (tol < 0.0) throw std::invalid_argument("numerical_rank: tol must be nonnegative");
    const RVector ev = hermitian_eig(a).eigenvalues;
    if (ev.size() == 0) return 0;
    double lmax = std::max(ev(0), 0.0);
    if (ev.minCoeff() < -tol * std::max(lmax, 1e-300))
        throw NumericalError("numerical_rank: matrix has a significant negative eigenvalue");
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > tol * lmax) ++r;
    return r;
}

}  // namespace irsnoma

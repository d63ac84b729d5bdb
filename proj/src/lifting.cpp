// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/lifting.hpp"

#include <cmath>

namespace irsnoma {

CMatrix irs_cascade(const CVector& g, const CMatrix& f) {
    if (g.size() != f.rows())
        throw std::invalid_argument("irs_cascade: dimension mismatch");
    return g.conjugate().asDiagonal() * f;
}

CMatrix lifted_strength_matrix(const CMatrix& cascade, const CVector& v) {
    const Eigen::Index m = cascade.rows();
    if (v.size() != cascade.cols())
        throw std::invalid_argument("lifted_strength_matrix: dimension mismatch");
    CMatrix s = CMatrix::Zero(m + 1, m + 1);
    s.topLeftCorner(m, m) = cascade * cascade.adjoint();
    CVector b = cascade * v;
    s.topRightCorner(m, 1) = b;
    s.bottomLeftCorner(1, m) = b.adjoint();
    return s;
}

CMatrix lifted_link_matrix(const CVector& l, Complex w) {
    const Eigen::Index m = l.size();
    CMatrix r = CMatrix::Zero(m + 1, m + 1);
    r.topLeftCorner(m, m) = l * l.adjoint();
    CVector b = std::conj(w) * l;
    r.topRightCorner(m, 1) = b;
    r.bottomLeftCorner(1, m) = b.adjoint();
    return r;
}

CMatrix lifted_channel_stack(const CVector& g, const CMatrix& f, const CVector& v) {
    const Eigen::Index m = f.rows();
    CMatrix stack(m + 1, f.cols());
    stack.topRows(m) = irs_cascade(g, f);
    stack.bottomRows(1) = v.adjoint();
    return stack;
}

CVector lifted_phase_vector(const RVector& theta) {
    const Eigen::Index m = theta.size();
    CVector e(m + 1);
    for (Eigen::Index i = 0; i < m; ++i) e(i) = std::polar(1.0, -theta(i));
    e(m) = 1.0;
    return e;
}

RVector phases_from_lifted(const CVector& z) {
    const Eigen::Index m = z.size() - 1;
    if (m < 0) throw std::invalid_argument("phases_from_lifted: vector too short");
    RVector theta(m);
    double ref = std::arg(z(m));
    for (Eigen::Index i = 0; i < m; ++i) theta(i) = wrap_two_pi(ref - std::arg(z(i)));
    return theta;
}

}  // namespace irsnoma

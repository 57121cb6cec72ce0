#include "qmeas/operator_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace qmeas {

Operator::Operator(std::size_t dim, std::vector<cdouble> entries)
    : dim_(dim), a_(std::move(entries)) {
    if (a_.size() != dim * dim)
        throw OperatorError("Operator: entry count does not match dim*dim");
}

Operator Operator::identity(std::size_t dim) {
    Operator m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

Operator Operator::diagonal(const std::vector<cdouble>& d) {
    Operator m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
    return m;
}

Operator Operator::operator+(const Operator& o) const {
    if (dim_ != o.dim_) throw OperatorError("Operator+: dimension mismatch");
    Operator r(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
}

Operator Operator::operator-(const Operator& o) const {
    if (dim_ != o.dim_) throw OperatorError("Operator-: dimension mismatch");
    Operator r(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
}

Operator Operator::operator*(const Operator& o) const {
    if (dim_ != o.dim_) throw OperatorError("Operator*: dimension mismatch");
    Operator r(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t k = 0; k < dim_; ++k) {
            const cdouble aik = a_[i * dim_ + k];
            if (aik == cdouble{}) continue;
            const cdouble* brow = &o.a_[k * dim_];
            cdouble* rrow = &r.a_[i * dim_];
            for (std::size_t j = 0; j < dim_; ++j) rrow[j] += aik * brow[j];
        }
    }
    return r;
}

Operator Operator::operator*(cdouble s) const {
    Operator r(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
    return r;
}

Operator Operator::adjoint() const {
    Operator r(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) r.at(j, i) = std::conj(at(i, j));
    return r;
}

cdouble Operator::trace() const {
    cdouble t{};
    for (std::size_t i = 0; i < dim_; ++i) t += at(i, i);
    return t;
}

double Operator::frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

double Operator::max_abs() const {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
}

bool Operator::is_hermitian(double tol) const {
    return distance(*this, adjoint()) < tol;
}

bool Operator::is_unitary(double tol) const {
    return distance(adjoint() * (*this), identity(dim_)) < tol;
}

bool Operator::all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](const cdouble& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

Operator Operator::tensor(const Operator& o) const {
    const std::size_t da = dim_, db = o.dim_;
    Operator r(da * db);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j) {
            const cdouble aij = at(i, j);
            if (aij == cdouble{}) continue;
            for (std::size_t k = 0; k < db; ++k)
                for (std::size_t l = 0; l < db; ++l)
                    r.at(i * db + k, j * db + l) = aij * o.at(k, l);
        }
    return r;
}

double distance(const Operator& a, const Operator& b) {
    return (a - b).frobenius_norm();
}

Projector::Projector(Operator m, double tol) : m_(std::move(m)) {
    if (!m_.all_finite()) throw OperatorError("Projector: non-finite entries");
    if (!m_.is_hermitian(tol)) throw OperatorError("Projector: not hermitian");
    if (distance(m_ * m_, m_) >= tol) throw OperatorError("Projector: not idempotent");
}

std::size_t Projector::rank() const {
    return static_cast<std::size_t>(std::llround(m_.trace().real()));
}

Projector make_projector(const std::vector<std::vector<cdouble>>& basis_vectors) {
    if (basis_vectors.empty()) throw OperatorError("make_projector: no vectors");
    const std::size_t dim = basis_vectors.front().size();
    if (dim == 0) throw OperatorError("make_projector: zero-dimensional vector");

    auto dot = [dim](const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
        cdouble s{};
        for (std::size_t i = 0; i < dim; ++i) s += std::conj(a[i]) * b[i];
        return s;
    };
    auto norm = [&](const std::vector<cdouble>& v) { return std::sqrt(dot(v, v).real()); };

    std::vector<std::vector<cdouble>> ortho;
    for (const auto& input : basis_vectors) {
        if (input.size() != dim)
            throw OperatorError("make_projector: inconsistent vector dimensions");
        if (norm(input) < 1e-12) throw OperatorError("make_projector: zero vector");
        std::vector<cdouble> v = input;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : ortho) {
                const cdouble c = dot(u, v);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= c * u[i];
            }
        }
        const double r = norm(v);
        if (r < 1e-10 * norm(input)) continue; // already in the span
        for (auto& z : v) z /= r;
        ortho.push_back(std::move(v));
    }
    if (ortho.empty()) throw OperatorError("make_projector: degenerate span");

    Operator p(dim);
    for (const auto& u : ortho)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) p.at(i, j) += u[i] * std::conj(u[j]);
    return Projector(std::move(p));
}

ProjectorPartition::ProjectorPartition(std::vector<Projector> projectors,
                                       bool has_complement, double tol)
    : projectors_(std::move(projectors)), has_complement_(has_complement) {
    if (projectors_.empty()) throw OperatorError("ProjectorPartition: empty");
    const std::size_t d = projectors_.front().dim();
    for (const auto& p : projectors_)
        if (p.dim() != d) throw OperatorError("ProjectorPartition: dimension mismatch");
    for (std::size_t i = 0; i < projectors_.size(); ++i)
        for (std::size_t j = i + 1; j < projectors_.size(); ++j) {
            const double off = (projectors_[i].op() * projectors_[j].op()).frobenius_norm();
            if (off >= tol)
                throw OperatorError("ProjectorPartition: members " + std::to_string(i) +
                                    " and " + std::to_string(j) + " are not orthogonal");
        }
}

ProjectorPartition ProjectorPartition::with_complement() const {
    Operator sum = Operator::zero(dim());
    for (const auto& p : projectors_) sum = sum + p.op();
    Operator ex = Operator::identity(dim()) - sum;
    std::vector<Projector> all = projectors_;
    all.emplace_back(std::move(ex));
    return ProjectorPartition(std::move(all), /*has_complement=*/true);
}

bool ProjectorPartition::is_complete(double tol) const {
    Operator sum = Operator::zero(dim());
    for (const auto& p : projectors_) sum = sum + p.op();
    return distance(sum, Operator::identity(dim())) < tol;
}

void ProjectorPartition::require_complete(double tol) const {
    if (!is_complete(tol))
        throw OperatorError("partition is incomplete (sum of projectors != identity)");
}

Operator coarse_grained_exp(const ProjectorPartition& partition, const PhaseVector& alphas) {
    partition.require_complete();
    if (alphas.size() != partition.size())
        throw OperatorError("coarse_grained_exp: phase count != partition size");
    Operator u = Operator::zero(partition.dim());
    for (std::size_t k = 0; k < partition.size(); ++k) {
        const cdouble phase = std::polar(1.0, alphas[k]);
        u = u + partition[k].op() * phase;
    }
    return u;
}

Operator two_factor_exp(const ProjectorPartition& partition_r,
                        const ProjectorPartition& partition_s,
                        const std::vector<PhaseVector>& alphas_rs) {
    partition_r.require_complete();
    partition_s.require_complete();
    if (alphas_rs.size() != partition_r.size())
        throw OperatorError("two_factor_exp: phase rows != first partition size");
    for (const auto& row : alphas_rs)
        if (row.size() != partition_s.size())
            throw OperatorError("two_factor_exp: phase columns != second partition size");

    Operator u = Operator::zero(partition_r.dim() * partition_s.dim());
    for (std::size_t r = 0; r < partition_r.size(); ++r)
        for (std::size_t s = 0; s < partition_s.size(); ++s) {
            const cdouble phase = std::polar(1.0, alphas_rs[r][s]);
            u = u + partition_r[r].op().tensor(partition_s[s].op()) * phase;
        }
    return u;
}

Operator tensor_factor_exp(const SpectralData& q_spectral, const Operator& r) {
    if (q_spectral.eigenvalues.size() != q_spectral.projectors.size())
        throw OperatorError("tensor_factor_exp: eigenvalue/projector count mismatch");
    if (q_spectral.projectors.empty())
        throw OperatorError("tensor_factor_exp: empty spectral data");
    ProjectorPartition partition(q_spectral.projectors);
    partition.require_complete();

    Operator u = Operator::zero(partition.dim() * r.dim());
    for (std::size_t q = 0; q < partition.size(); ++q) {
        const Operator expqr = matrix_exp_oracle(r * cdouble(0.0, q_spectral.eigenvalues[q]));
        u = u + partition[q].op().tensor(expqr);
    }
    return u;
}

Operator bch_eta_truncated(const Operator& a, const Operator& b, int order) {
    if (a.dim() != b.dim()) throw OperatorError("bch_eta_truncated: dimension mismatch");
    if (order < 1 || order > 3) throw OperatorError("bch_eta_truncated: order must be 1..3");
    Operator eta = a + b;
    if (order >= 2) eta = eta + commutator(a, b) * cdouble(0.5, 0.0);
    if (order >= 3) {
        const Operator ab = commutator(a, b);
        eta = eta + (commutator(ab, b) + commutator(commutator(b, a), a)) * cdouble(1.0 / 12.0, 0.0);
    }
    return eta;
}

Operator matrix_exp_oracle(const Operator& a) {
    if (!a.all_finite()) throw OperatorError("matrix_exp_oracle: non-finite entries");
    const std::size_t dim = a.dim();

    // scale so the series argument has Frobenius norm <= 0.5
    int squarings = 0;
    double nrm = a.frobenius_norm();
    while (nrm > 0.5 && squarings < 64) {
        nrm *= 0.5;
        ++squarings;
    }
    const double scale = std::ldexp(1.0, -squarings);
    const Operator x = a * cdouble(scale, 0.0);

    Operator result = Operator::identity(dim);
    Operator term = Operator::identity(dim);
    for (int n = 1; n <= 32; ++n) {
        term = term * x * cdouble(1.0 / n, 0.0);
        result = result + term;
        if (term.frobenius_norm() < 1e-18 * std::max(1.0, result.frobenius_norm())) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

Projector projector_logic(ProjectorOp op, const Projector& p1, const Projector* p2) {
    switch (op) {
    case ProjectorOp::Not:
        return Projector(Operator::identity(p1.dim()) - p1.op());
    case ProjectorOp::Or: {
        if (!p2) throw OperatorError("projector_logic: 'or' needs two operands");
        if ((p1.op() * p2->op()).frobenius_norm() >= 1e-12)
            throw OperatorError("projector_logic: 'or' requires disjoint projectors");
        return Projector(p1.op() + p2->op());
    }
    case ProjectorOp::And: {
        if (!p2) throw OperatorError("projector_logic: 'and' needs two operands");
        const Operator prod = p1.op() * p2->op();
        if (distance(prod, p2->op() * p1.op()) >= 1e-12)
            throw OperatorError("projector_logic: 'and' requires commuting projectors");
        return Projector(prod);
    }
    }
    throw OperatorError("projector_logic: unknown op");
}

} // namespace qmeas

#pragma once

#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qmeas {

using cdouble = std::complex<double>;

class OperatorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Dense operator on a finite-dimensional Hilbert space, row-major storage.
// Values are immutable after construction apart from the named factories.
class Operator {
  public:
    Operator() = default;
    explicit Operator(std::size_t dim) : dim_(dim), a_(dim * dim, cdouble{}) {}
    Operator(std::size_t dim, std::vector<cdouble> entries);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim) { return Operator(dim); }
    static Operator diagonal(const std::vector<cdouble>& d);

    std::size_t dim() const { return dim_; }
    const cdouble& at(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }
    cdouble& at(std::size_t r, std::size_t c) { return a_[r * dim_ + c]; }
    const std::vector<cdouble>& entries() const { return a_; }

    Operator operator+(const Operator& o) const;
    Operator operator-(const Operator& o) const;
    Operator operator*(const Operator& o) const;
    Operator operator*(cdouble s) const;
    friend Operator operator*(cdouble s, const Operator& m) { return m * s; }

    Operator adjoint() const;
    cdouble trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    bool is_hermitian(double tol = 1e-12) const;
    bool is_unitary(double tol = 1e-12) const;
    bool all_finite() const;

    // Kronecker product, row-major on the product space.
    Operator tensor(const Operator& o) const;

  private:
    std::size_t dim_ = 0;
    std::vector<cdouble> a_;
};

inline Operator commutator(const Operator& a, const Operator& b) {
    return a * b - b * a;
}

double distance(const Operator& a, const Operator& b);

// Orthogonal projector; construction validates P = P^dagger and P^2 = P to
// 1e-12 in Frobenius norm.
class Projector {
  public:
    explicit Projector(Operator m, double tol = 1e-12);

    const Operator& op() const { return m_; }
    std::size_t dim() const { return m_.dim(); }
    // rank as rounded trace (exact for a projector)
    std::size_t rank() const;

  private:
    Operator m_;
};

// Projector onto the span of the given vectors (modified Gram-Schmidt with
// one re-orthogonalization pass; dependent directions are dropped).
Projector make_projector(const std::vector<std::vector<cdouble>>& basis_vectors);

// Ordered family of pairwise-orthogonal projectors, the coarse-graining
// {P_k}. Orthogonality is checked eagerly; completeness (sum = identity) on
// demand by the operations that require it.
class ProjectorPartition {
  public:
    explicit ProjectorPartition(std::vector<Projector> projectors,
                                bool has_complement = false, double tol = 1e-12);

    // Appends the complement I - sum P_k as a trailing "ex" block.
    ProjectorPartition with_complement() const;

    std::size_t size() const { return projectors_.size(); }
    std::size_t dim() const { return projectors_.front().dim(); }
    const Projector& operator[](std::size_t k) const { return projectors_[k]; }
    bool has_complement() const { return has_complement_; }

    bool is_complete(double tol = 1e-12) const;
    void require_complete(double tol = 1e-12) const;

  private:
    std::vector<Projector> projectors_;
    bool has_complement_ = false;
};

using PhaseVector = std::vector<double>;

// sum_k e^{i alpha_k} P_k for a complete partition; the result is unitary.
Operator coarse_grained_exp(const ProjectorPartition& partition, const PhaseVector& alphas);

// sum_{r,s} e^{i alpha_rs} P_r (x) P_s on the tensor-product space. Zero
// phases contribute the factor 1, not nothing.
Operator two_factor_exp(const ProjectorPartition& partition_r,
                        const ProjectorPartition& partition_s,
                        const std::vector<PhaseVector>& alphas_rs);

struct SpectralData {
    std::vector<double> eigenvalues;
    std::vector<Projector> projectors;
};

// sum_q P_q (x) exp(i q R) for Q given by its spectral data.
Operator tensor_factor_exp(const SpectralData& q_spectral, const Operator& r);

// Truncated Campbell-Hausdorff eta(A,B): order 1 = A+B, order 2 adds
// [A,B]/2, order 3 adds ([[A,B],B] + [[B,A],A])/12.
Operator bch_eta_truncated(const Operator& a, const Operator& b, int order);

// Dense exponential by scaling and squaring of the power series. Independent
// of the spectral identities it backs.
Operator matrix_exp_oracle(const Operator& a);

enum class ProjectorOp { Or, And, Not };

// "or" requires disjoint operands (P1 P2 = 0) and returns P1 + P2; "not"
// returns I - P1; "and" returns P1 P2 (the zero operator when disjoint).
Projector projector_logic(ProjectorOp op, const Projector& p1,
                          const Projector* p2 = nullptr);

} // namespace qmeas

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmeas/grid_field.hpp"
#include "qmeas/operator_algebra.hpp"

namespace qmeas {

class StochasticError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Apparatus pointer profile: normalized Gaussian of width w with an optional
// plane-wave carrier e^{i k0 y}. The neutral component sits at
// `neutral_offset`, far outside every pointer shift.
struct PointerModel {
    double width = 1.0;
    double carrier = 0.0;
    double neutral_offset = 0.0;
};

// integral dy Phi0(y - eta_k tau) Phi0*(y - eta_kp tau), closed form
cdouble pointer_overlap(const PointerModel& model, double eta_k, double eta_kp,
                        double tau);

// |<Phi_perp | Phi0(. - eta tau)>| for the displaced neutral component
double neutral_overlap_magnitude(const PointerModel& model, double eta, double tau);

struct Marginal {
    enum class Kind { Uniform, Gaussian };
    Kind kind = Kind::Uniform;
    double a = 0.0, b = 1.0;   // uniform support
    double mean = 0.0, sd = 1.0; // gaussian parameters

    static Marginal uniform(double a, double b);
    static Marginal gaussian(double mean, double sd);
};

// Density pi(eta_1, ..., eta_n, y) as a product of independent marginals.
struct ParamDensity {
    std::vector<Marginal> eta;
    Marginal y = Marginal::uniform(0.0, 1.0);
    bool independent = true;
};

struct StochasticParams {
    std::vector<double> etas;
    double y_offset = 0.0;
};

StochasticParams sample_params(const ParamDensity& density, std::uint64_t seed,
                               std::uint64_t index = 0);

struct AverageOptions {
    enum class Method { Quadrature, MonteCarlo };
    Method method = Method::Quadrature;
    std::size_t mc_samples = 10000;
    std::uint64_t seed = 0;
};

struct AverageResult {
    cdouble value{};
    double std_error = 0.0; // Monte Carlo only
};

// Normalized expectation of u over the stochastic-parameter density (the
// overbar average).
// Quadrature (64-node Gauss-Legendre per dimension) supports up to 3
// stochastic dimensions including y; Monte Carlo beyond.
AverageResult overbar_average(const std::function<cdouble(const StochasticParams&)>& u,
                              const ParamDensity& density,
                              const AverageOptions& options = {});

// Expectation of a two-parameter function over a pair of independent
// marginals (2-D quadrature), used for pairwise decoherence factors.
cdouble average_pair(const std::function<cdouble(double, double)>& u,
                     const Marginal& first, const Marginal& second);

struct DecoherenceMatrix {
    Operator matrix;        // averaged pointer overlaps over (k, k')
    double max_offdiagonal = 0.0;
};

DecoherenceMatrix decoherence_matrix(const PointerModel& model,
                                     const ParamDensity& density, double tau,
                                     const AverageOptions& options = {});

// Pairwise phase-average factors E[e^{-i tau (eta_k - eta_k')}], the
// stochastic-phase decoherence route without a pointer profile.
DecoherenceMatrix phase_average_matrix(const ParamDensity& density, double tau);

struct Branch {
    std::size_t k = 0; // coarse-grained outcome index
    cdouble coeff{1.0, 0.0};
    WaveField field;
};

// sum_{k,k'} sum_{lambda,lambda'} c c* psi psi* M_{kk'}: cross-k interference
// weighted by the decoherence matrix, intra-k coherence retained.
std::vector<double> averaged_density(const std::vector<Branch>& branches,
                                     const Operator& matrix);

std::vector<double> averaged_density(const std::vector<Branch>& branches,
                                     const PointerModel& model,
                                     const ParamDensity& density, double tau,
                                     const AverageOptions& options = {});

// 64-node Gauss-Legendre rule on [-1, 1]
void gauss_legendre(std::size_t n, std::vector<double>& nodes,
                    std::vector<double>& weights);

} // namespace qmeas

#pragma once

#include "overcrit/scattering.hpp"

#include <json.hpp>

namespace overcrit {

struct GapLevel {
    double energy = 0.0;
    Vector state;
};

// Lowest eigenpair strictly inside the H0 gap; phase chosen so the largest-magnitude
// amplitude is real and positive.
GapLevel ground_gap_vector(const TwoBandModel& model, double lambda_eff);
GapLevel ground_gap_vector(const SpectralDecomposition& dec, const BandWindows& bands);

struct WitnessBundle {
    double lambda = 0.0;
    double lambda_c = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double delta = 0.0;
    double s0 = 0.0;
    double start_time = 0.0;  // -(s0 + delta)/eps1
    double start_coupling = 0.0; // lambda phi_eps(start_time)
    double psi_energy = 0.0;

    Vector psi_g;     // lowest gap level of H(start_time)
    Vector phi_prime; // U(-2/eps1, start_time) psi_g
    Vector phi;       // exp(-i(2/eps1)H0) phi_prime
    Vector chi;       // U(0, -2/eps1) phi_prime
    Vector outgoing;  // U(2/eps2, 0) chi

    double in1 = 0.0;        // ||P_H0(sigma+) phi_prime||
    double in2 = 0.0;        // ||P_H_lambda(sigma-) chi||
    double transition = 0.0; // ||P_H0(sigma-) outgoing||
    double unitarity_defect = 0.0;
};

WitnessBundle build_witness(const Dynamics& dyn, double lambda_c, double delta = 0.1);
void to_json(nlohmann::json& j, const WitnessBundle& w);

// P_H0(sigma-) W+^dagger chi with the static approximant standing in for W+.
Vector tilde_phi(const Dynamics& dyn, const WitnessBundle& w, const MollerApproximant& w_plus);

// max over probes of ||(W+_eps2 - W+(T)) psi||
double moller_probe_distance(const Dynamics& dyn, const StaticScattering& stat, const MollerApproximant& w_plus);

struct ProofChain {
    double tilde_norm = 0.0;
    double inner_product = 0.0; // |<W+(T) tilde_phi, chi>|
    double in2_squared = 0.0;
    double probe_distance = 0.0;
    double horizon = 0.0;
    double lower_bound = 0.0; // in2^2 - 2 probe_distance - 0.05
    bool holds = false;       // transition >= lower_bound
};

ProofChain proof_chain(const Dynamics& dyn, const WitnessBundle& w, const StaticScattering& stat, double horizon);

struct CookCurve {
    double eps1 = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> t_grid;
    std::vector<double> integrand;         // ||V exp(-itH0) state||
    std::vector<double> partial_integrals; // trapezoid from 0
};

CookCurve cook_integral(const TwoBandModel& model, const Vector& state, double t_max, double dt);
CookCurve cook_integral(const TwoBandModel& model, const SpectralDecomposition& h0, const Vector& state,
    double t_max, double dt);
void write_csv(std::ostream& out, const CookCurve& curve);

} // namespace overcrit

#pragma once

#include "overcrit/linalg.hpp"

#include <json.hpp>

#include <span>

namespace overcrit {

enum class Boundary { periodic, box };

// 1D two-band Wilson-Dirac chain with an attractive square well.
// Site n carries the two-component spinor at indices 2n, 2n+1.
struct TwoBandModel {
    int n_sites = 256;
    double mass = 0.5;
    double hopping = 1.0;
    double wilson = 0.5;
    Boundary boundary = Boundary::periodic;
    double well_depth = 1.0;
    int well_halfwidth = 4;
    int well_center = 128;

    static TwoBandModel reference();

    int dim() const { return 2 * n_sites; }
    bool in_well(int site) const;
    int well_sites() const { return 2 * well_halfwidth + 1; }
    void validate() const;
};

// Dense matrix that has been checked to be Hermitian.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix entries);

    const Matrix& matrix() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }

private:
    Matrix entries_;
};

struct BandWindows {
    Interval sigma_minus;
    Interval sigma_plus;

    double lower_edge() const { return sigma_minus.hi; } // b-
    double upper_edge() const { return sigma_plus.lo; }  // a+
    double gap_width() const { return sigma_plus.lo - sigma_minus.hi; }
    bool in_gap(double e) const { return e > sigma_minus.hi && e < sigma_plus.lo; }
};

HermitianOperator build_h0(const TwoBandModel& model);
HermitianOperator build_potential(const TwoBandModel& model);
HermitianOperator h_of(const TwoBandModel& model, double lambda_eff);
HermitianOperator h_of(const HermitianOperator& h0, const HermitianOperator& v, double lambda_eff);

// Diagonal of V (length dim), cheaper to carry around than the matrix.
RealVector potential_diagonal(const TwoBandModel& model);

BandWindows band_edges(std::span<const double> h0_spectrum, const TwoBandModel& model);

// Upper branch of the bulk dispersion and the largest |dE/dk| over the zone.
double band_energy(const TwoBandModel& model, double k);
double max_group_velocity(const TwoBandModel& model);

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

void to_json(nlohmann::json& j, const TwoBandModel& m);
void from_json(const nlohmann::json& j, TwoBandModel& m);

} // namespace overcrit

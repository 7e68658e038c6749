#pragma once

#include "overcrit/spectral.hpp"
#include "overcrit/switching.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace overcrit {

enum class Integrator { midpoint_exponential, split_step };

// How exp(-i h H(t_mid)) is applied on a ramp step.
enum class StepExponential { taylor, eigen };

struct EvolutionConfig {
    double dt_max = 0.025;
    double rate_cap = 0.1; // c in dt <= c / |d phi_eps / dt|
    Integrator integrator = Integrator::midpoint_exponential;
    StepExponential step_exponential = StepExponential::taylor;

    void validate() const;
};

struct EvolutionStats {
    long steps = 0;          // ramp steps taken
    double norm_drift = 0.0; // largest relative column-norm change
};

// H(t) = H0 + lambda phi_eps(t) V for one model, coupling and schedule.
//
// Outside the ramps the generator is constant (H0 before -2/eps1 and after 2/eps2,
// H_lambda on the plateau), so those segments are exact exponentials taken from cached
// eigendecompositions. Ramp segments are stepped with the midpoint rule on a fixed grid
// laid out from the outer edge of each ramp; a partial interval uses the grid points it
// contains plus its own endpoints. Reversing an interval visits the same steps in the
// opposite order, so U(a,b) and U(b,a) are inverse to rounding.
class Dynamics {
public:
    Dynamics(const TwoBandModel& model, double lambda, const SwitchingSchedule& schedule,
        const EvolutionConfig& config = {});

    // Same model and coupling, new rates; the cached spectra are shared.
    Dynamics with_schedule(const SwitchingSchedule& schedule) const;

    const TwoBandModel& model() const { return model_; }
    double lambda() const { return lambda_; }
    const SwitchingSchedule& schedule() const { return schedule_; }
    const EvolutionConfig& config() const { return config_; }
    const BandWindows& bands() const { return shared_->bands; }
    const SpectralDecomposition& free_spectrum() const { return shared_->h0; }
    const SpectralDecomposition& coupled_spectrum() const { return *coupled_; }
    const RealVector& potential() const { return shared_->v; }

    // Step actually used on ramps: dt_max clamped to 0.1 / (spectral radius bound).
    double step_size() const { return dt_; }
    // Ramp grid points, ascending, for the switch-on and switch-off ramps.
    const std::vector<double>& ramp_on_grid() const { return ramp_on_; }
    const std::vector<double>& ramp_off_grid() const { return ramp_off_; }

    Vector evolve(const Vector& state, double t_from, double t_to, EvolutionStats* stats = nullptr) const;
    Matrix evolve_block(Matrix block, double t_from, double t_to, EvolutionStats* stats = nullptr) const;
    Matrix propagator(double t_from, double t_to, EvolutionStats* stats = nullptr) const;

    // exp(-i t H0) block and exp(-i t H_lambda) block
    Matrix free_evolve(const Matrix& block, double t) const;
    Matrix coupled_evolve(const Matrix& block, double t) const;

    // Estimated ramp steps for a full pass over [-2/eps1, 2/eps2].
    long ramp_steps() const { return long(ramp_on_.size() + ramp_off_.size()) - 2; }

private:
    struct Shared {
        TwoBandModel model;
        HermitianOperator h0_dense;
        SpectralDecomposition h0;
        BandWindows bands;
        Eigen::SparseMatrix<Complex, Eigen::RowMajor> h0_sparse;
        RealVector v;
        double h0_norm1 = 0.0;
    };

    Dynamics(std::shared_ptr<const Shared> shared, std::shared_ptr<const SpectralDecomposition> coupled,
        double lambda, const SwitchingSchedule& schedule, const EvolutionConfig& config);

    void build_grids();
    std::vector<double> ramp_grid(double outer, double inner) const;
    void constant_step(Matrix& x, const SpectralDecomposition& dec, double h) const;
    void ramp_segment(Matrix& x, const std::vector<double>& grid, double from, double to, long& steps) const;
    void ramp_step(Matrix& x, double h, double mu) const;
    void taylor_step(Matrix& x, double h, double mu) const;

    std::shared_ptr<const Shared> shared_;
    std::shared_ptr<const SpectralDecomposition> coupled_;
    TwoBandModel model_;
    double lambda_;
    SwitchingSchedule schedule_;
    EvolutionConfig config_;
    double dt_ = 0.0;
    std::vector<double> ramp_on_;
    std::vector<double> ramp_off_;
};

Vector evolve(const Vector& state, double t_from, double t_to, const TwoBandModel& model, double lambda,
    const SwitchingSchedule& schedule, const EvolutionConfig& config = {});
Matrix propagator(double t_from, double t_to, const TwoBandModel& model, double lambda,
    const SwitchingSchedule& schedule, const EvolutionConfig& config = {});

std::string_view to_string(Integrator i);
std::string_view to_string(StepExponential k);
void to_json(nlohmann::json& j, const EvolutionConfig& c);
void from_json(const nlohmann::json& j, EvolutionConfig& c);

} // namespace overcrit

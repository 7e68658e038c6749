#include "overcrit/switching.hpp"

#include "overcrit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace overcrit {

namespace {

    // Smooth step on [0,1]: exp(-a/x) / (exp(-a/x) + exp(-a/(1-x))), written as a
    // logistic of the exponent difference so it never forms inf/inf.
    double smooth_step(double a, double x)
    {
        if (x <= 0.0)
            return 0.0;
        if (x >= 1.0)
            return 1.0;
        const double z = a * (1.0 / x - 1.0 / (1.0 - x));
        return 1.0 / (1.0 + std::exp(z));
    }

    double smooth_step_derivative(double a, double x)
    {
        if (x <= 0.0 || x >= 1.0)
            return 0.0;
        const double g = smooth_step(a, x);
        return g * (1.0 - g) * a * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)));
    }

} // namespace

void BumpProfile::validate() const
{
    require(std::isfinite(transition_sharpness) && transition_sharpness > 0.0, ErrorCode::invalid_argument,
        "transition_sharpness must be positive");
}

double BumpProfile::max_slope() const
{
    constexpr int samples = 4000;
    double best = 0.0;
    for (int j = 1; j < samples; ++j)
        best = std::max(best, smooth_step_derivative(transition_sharpness, double(j) / samples));
    return best;
}

double phi(const BumpProfile& profile, double s)
{
    return smooth_step(profile.transition_sharpness, 2.0 - std::abs(s));
}

double phi_derivative(const BumpProfile& profile, double s)
{
    const double sign = s > 0.0 ? -1.0 : 1.0;
    return sign * smooth_step_derivative(profile.transition_sharpness, 2.0 - std::abs(s));
}

void SwitchingSchedule::validate() const
{
    require(std::isfinite(eps1) && eps1 > 0.0, ErrorCode::invalid_argument, "eps1 must be positive");
    require(std::isfinite(eps2) && eps2 > 0.0, ErrorCode::invalid_argument, "eps2 must be positive");
    profile.validate();
}

double phi_eps(const SwitchingSchedule& schedule, double t)
{
    return t < 0.0 ? phi(schedule.profile, schedule.eps1 * t) : phi(schedule.profile, schedule.eps2 * t);
}

double phi_eps_rate(const SwitchingSchedule& schedule, double t)
{
    return t < 0.0 ? schedule.eps1 * phi_derivative(schedule.profile, schedule.eps1 * t)
                   : schedule.eps2 * phi_derivative(schedule.profile, schedule.eps2 * t);
}

double find_s0(const BumpProfile& profile, double lambda, double lambda_c)
{
    profile.validate();
    require(std::isfinite(lambda) && std::isfinite(lambda_c) && lambda_c > 0.0, ErrorCode::invalid_argument,
        "couplings must be finite with lambda_c > 0");
    require(lambda > lambda_c, ErrorCode::over_under_critical, "s0 exists only for lambda > lambda_c");
    const double target = lambda_c / lambda;
    double lo = 1.0; // phi(-lo) = 1 > target
    double hi = 2.0; // phi(-hi) = 0 < target
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (phi(profile, -mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void to_json(nlohmann::json& j, const BumpProfile& p)
{
    j = nlohmann::json { { "transition_sharpness", p.transition_sharpness } };
}

void from_json(const nlohmann::json& j, BumpProfile& p)
{
    require(j.is_object(), ErrorCode::invalid_argument, "profile config must be a JSON object");
    for (const auto& [key, value] : j.items())
        require(key == "transition_sharpness", ErrorCode::invalid_argument, "unknown profile key '" + key + "'");
    BumpProfile out;
    try {
        out.transition_sharpness = j.value("transition_sharpness", out.transition_sharpness);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::invalid_argument, std::string("bad profile config: ") + e.what());
    }
    out.validate();
    p = out;
}

} // namespace overcrit

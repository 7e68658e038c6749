#pragma once

#include <json.hpp>

namespace overcrit {

// C-infinity plateau bump: 1 on |s| <= 1, 0 on |s| >= 2, a smooth step in between.
struct BumpProfile {
    double transition_sharpness = 1.0;

    void validate() const;
    // sup |phi'|, found once by sampling the transition region
    double max_slope() const;
};

double phi(const BumpProfile& profile, double s);
double phi_derivative(const BumpProfile& profile, double s);

struct SwitchingSchedule {
    double eps1 = 0.25; // switch-on rate, t < 0
    double eps2 = 0.25; // switch-off rate, t >= 0
    BumpProfile profile;

    void validate() const;
    double support_begin() const { return -2.0 / eps1; }
    double support_end() const { return 2.0 / eps2; }
    double plateau_begin() const { return -1.0 / eps1; }
    double plateau_end() const { return 1.0 / eps2; }
};

double phi_eps(const SwitchingSchedule& schedule, double t);
double phi_eps_rate(const SwitchingSchedule& schedule, double t); // d phi_eps / dt

// s0 in (1,2) with phi(-s0) = lambda_c / lambda.
double find_s0(const BumpProfile& profile, double lambda, double lambda_c);

void to_json(nlohmann::json& j, const BumpProfile& p);
void from_json(const nlohmann::json& j, BumpProfile& p);

} // namespace overcrit

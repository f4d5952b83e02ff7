#pragma once

#include "foilmqs/circuit.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace foil {

enum class InitialState { ZeroStart, Provided };

struct StepperConfig {
    double t0 = 0.0;
    double t_end = 22e-3;
    double dt = 1e-5;
    InitialState initial = InitialState::ZeroStart;
    Vector y0;                          // used with InitialState::Provided
    double blowup_bound = 1e12;         // divergence when |y|_inf exceeds this
    double consistency_tolerance = 1e-12;
    Index snapshot_stride = 0;          // 0 disables state snapshots
    std::vector<std::string> probes;    // branch names; empty probes every branch

    static constexpr double kMaxSteps = 1e7;

    /// Number of steps; throws ValidationError on a bad interval or step.
    Index steps() const;
};

/// Terminal current (flowing from n+ to n- through the branch) and voltage.
struct BranchTrace {
    std::string name;
    std::vector<double> i;
    std::vector<double> v;
};

struct TimeSeries {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<BranchTrace> traces;
    std::vector<double> snapshot_times;
    std::vector<Vector> snapshots;
    bool diverged = false;
    Index divergence_step = -1;

    /// Throws std::out_of_range for an unknown branch.
    const BranchTrace& trace(std::string_view name) const;
    std::size_t size() const { return t.size(); }
};

/// All-zero state after checking the algebraic rows of A*0 = s(t0).
/// Throws InconsistentInitialState.
Vector consistent_zero_start(const DAESystem& dae, double t0, double tol = 1e-12);

/// Implicit Euler with a single factorization of E/dt + A. Throws
/// SingularSystemAtStep when that matrix is singular; divergence ends the
/// run early and is reported in the returned series.
TimeSeries integrate(const DAESystem& dae, const StepperConfig& cfg);

}  // namespace foil

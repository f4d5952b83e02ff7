#include "foilmqs/timestepper.hpp"
#include "foilmqs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace foil {

Index StepperConfig::steps() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("time step must be positive");
    }
    if (!(t_end > t0)) {
        throw ValidationError("t_end must exceed t0");
    }
    const double n = (t_end - t0) / dt;
    if (n > kMaxSteps) {
        throw ValidationError("more than 1e7 steps requested");
    }
    return std::max<Index>(1, static_cast<Index>(std::llround(n)));
}

const BranchTrace& TimeSeries::trace(std::string_view name) const {
    for (const auto& tr : traces) {
        if (tr.name == name) {
            return tr;
        }
    }
    throw std::out_of_range("no trace for branch '" + std::string(name) + "'");
}

Vector consistent_zero_start(const DAESystem& dae, double t0, double tol) {
    const Vector s = dae.source(t0);
    for (const Index row : dae.algebraic_rows()) {
        if (std::abs(s(row)) > tol) {
            throw InconsistentInitialState("zero state is inconsistent: source term " + std::to_string(s(row)) +
                                           " on algebraic row " + std::to_string(row));
        }
    }
    return Vector::Zero(dae.size());
}

TimeSeries integrate(const DAESystem& dae, const StepperConfig& cfg) {
    const Index steps = cfg.steps();
    const double dt = cfg.dt;

    std::vector<Index> probed;
    if (cfg.probes.empty()) {
        for (Index b = 0; b < static_cast<Index>(dae.branch_names.size()); ++b) {
            probed.push_back(b);
        }
    } else {
        for (const auto& name : cfg.probes) {
            const auto it = std::find(dae.branch_names.begin(), dae.branch_names.end(), name);
            if (it == dae.branch_names.end()) {
                throw ValidationError("probe '" + name + "' is not a branch");
            }
            probed.push_back(static_cast<Index>(it - dae.branch_names.begin()));
        }
    }

    Vector y;
    if (cfg.initial == InitialState::Provided) {
        if (cfg.y0.size() != dae.size()) {
            throw ValidationError("initial state has the wrong size");
        }
        y = cfg.y0;
    } else {
        y = consistent_zero_start(dae, cfg.t0, cfg.consistency_tolerance);
    }

    const SparseMatrix e_dt = dae.E.scaled(1.0 / dt);
    Factorization lu;
    try {
        lu = sparse_factorize(add(e_dt, 1.0, dae.A, 1.0));
    } catch (const SingularMatrix& err) {
        throw SingularSystemAtStep(std::string("E/dt + A is singular: ") + err.what());
    }

    TimeSeries ts;
    ts.dt = dt;
    ts.t.reserve(static_cast<std::size_t>(steps + 1));
    for (const Index b : probed) {
        BranchTrace tr;
        tr.name = dae.branch_names[static_cast<std::size_t>(b)];
        tr.i.reserve(static_cast<std::size_t>(steps + 1));
        tr.v.reserve(static_cast<std::size_t>(steps + 1));
        ts.traces.push_back(std::move(tr));
    }

    Vector y_prev = y;
    auto record = [&](Index k, double t) {
        ts.t.push_back(t);
        for (std::size_t p = 0; p < probed.size(); ++p) {
            const Index b = probed[p];
            const double v = dae.branch_voltage(b, y);
            const auto& probe = dae.branch_currents[static_cast<std::size_t>(b)];
            double i = 0.0;
            switch (probe.kind) {
                case CurrentProbe::Kind::Unknown: i = y(probe.index); break;
                case CurrentProbe::Kind::Conductance: i = probe.coefficient * v; break;
                case CurrentProbe::Kind::Source: i = -dae.branch_waveforms[static_cast<std::size_t>(b)].value(t); break;
                case CurrentProbe::Kind::Capacitance:
                    i = k == 0 ? 0.0 : probe.coefficient * (v - dae.branch_voltage(b, y_prev)) / dt;
                    break;
            }
            ts.traces[p].i.push_back(i);
            ts.traces[p].v.push_back(v);
        }
        if (cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0) {
            ts.snapshot_times.push_back(t);
            ts.snapshots.push_back(y);
        }
    };

    record(0, cfg.t0);
    for (Index k = 1; k <= steps; ++k) {
        const double t = cfg.t0 + static_cast<double>(k) * dt;
        y_prev = y;
        y = lu.solve(e_dt * y_prev + dae.source(t));
        const double peak = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
        if (!(peak <= cfg.blowup_bound)) {
            ts.diverged = true;
            ts.divergence_step = k;
            break;
        }
        record(k, t);
    }
    return ts;
}

}  // namespace foil

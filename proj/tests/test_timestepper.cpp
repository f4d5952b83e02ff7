#include "foilmqs/errors.hpp"
#include "foilmqs/timestepper.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace foil;

namespace {

DAESystem stamp(const char* text, const FieldLibrary& lib = {}) {
    const Netlist n = parse_netlist(text);
    validate_netlist(n);
    return mna_stamp(n, lib);
}

double max_error(const TimeSeries& ts, const std::string& branch, const std::function<double(double)>& exact) {
    const auto& tr = ts.trace(branch);
    double err = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        err = std::max(err, std::abs(tr.i[k] - exact(ts.t[k])));
    }
    return err;
}

double observed_order(const std::vector<double>& errors) {
    return std::log(errors.front() / errors.back()) / std::log(std::pow(2.0, static_cast<double>(errors.size() - 1)));
}

}  // namespace

TEST_CASE("scalar decay takes one implicit Euler step") {
    const auto dae = stamp("C1 1 0 1\nR1 1 0 1\n");
    StepperConfig cfg;
    cfg.t_end = 0.5;
    cfg.dt = 0.5;
    cfg.initial = InitialState::Provided;
    cfg.y0 = Vector::Ones(1);
    const auto ts = integrate(dae, cfg);
    REQUIRE(ts.size() == 2);
    CHECK(ts.trace("C1").v[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    // capacitor current by difference quotient balances the resistor
    CHECK(ts.trace("C1").i[1] == Catch::Approx(-ts.trace("R1").i[1]).epsilon(1e-14));
}

TEST_CASE("voltage-driven inductor converges at first order") {
    const double L = 1e-3;
    const auto dae = stamp("V1 1 0 SIN 1 50\nL1 1 0 1e-3\n");
    const auto wave = Waveform::sine(1.0, 50.0);
    std::vector<double> errors;
    for (const double dt : {1e-3, 5e-4, 2.5e-4}) {
        StepperConfig cfg;
        cfg.t_end = 40e-3;
        cfg.dt = dt;
        const auto ts = integrate(dae, cfg);
        errors.push_back(max_error(ts, "L1", [&](double t) { return lumped_inductor_voltage_driven(L, 0.0, wave, 0.0, t); }));
    }
    const double p = observed_order(errors);
    CHECK(p >= 0.8);
    CHECK(p <= 1.2);
}

TEST_CASE("series RL circuit converges at first order") {
    const double R = 0.5, L = 2e-3, w = 2.0 * std::numbers::pi * 50.0;
    const auto dae = stamp("V1 1 0 SIN 1 50\nR1 1 2 0.5\nL1 2 0 2e-3\n");
    auto exact = [&](double t) {
        return (R * std::sin(w * t) - w * L * std::cos(w * t) + w * L * std::exp(-R * t / L)) / (R * R + w * w * L * L);
    };
    std::vector<double> errors;
    for (const double dt : {1e-3, 5e-4, 2.5e-4}) {
        StepperConfig cfg;
        cfg.t_end = 40e-3;
        cfg.dt = dt;
        errors.push_back(max_error(integrate(dae, cfg), "L1", exact));
    }
    const double p = observed_order(errors);
    CHECK(p >= 0.8);
    CHECK(p <= 1.2);
}

TEST_CASE("current-driven inductor voltage is the backward difference") {
    const double L = 1e-3, dt = 1e-5;
    const auto wave = Waveform::perturbed_sine(1.0, 50.0, 1e-3, 2.0 * std::numbers::pi * 1e10);
    const auto dae = stamp("I1 1 0 PSIN 1 50 1e-3 6.283185307179586e10\nL1 1 0 1e-3\n");
    StepperConfig cfg;
    cfg.t_end = 2e-3;
    cfg.dt = dt;
    const auto ts = integrate(dae, cfg);
    const auto& tr = ts.trace("L1");
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double expected = L * (wave.value(ts.t[k]) - wave.value(ts.t[k - 1])) / dt;
        CHECK(tr.v[k] == Catch::Approx(expected).epsilon(1e-9).margin(1e-12));
    }
    // source current is reported from n+ to n-
    CHECK(ts.trace("I1").i[5] == Catch::Approx(-tr.i[5]).epsilon(1e-12));
}

TEST_CASE("zero start consistency") {
    CHECK(consistent_zero_start(stamp("V1 1 0 SIN 1 50\nR1 1 0 1\n"), 0.0).norm() == 0.0);
    CHECK_NOTHROW(consistent_zero_start(stamp("V1 1 0 PSIN 1 50 1e-3 1e9\nR1 1 0 1\n"), 0.0));
    CHECK_THROWS_AS(consistent_zero_start(stamp("V1 1 0 DC 1\nR1 1 0 1\n"), 0.0), InconsistentInitialState);
    StepperConfig cfg;
    cfg.t_end = 1e-3;
    CHECK_THROWS_AS(integrate(stamp("V1 1 0 DC 1\nR1 1 0 1\n"), cfg), InconsistentInitialState);
    // a current source is not an algebraic row constraint on its own
    CHECK_NOTHROW(consistent_zero_start(stamp("I1 1 0 SIN 1 50\nC1 1 0 1\n"), 0.25));
}

TEST_CASE("stepper configuration guards") {
    StepperConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.steps(), ValidationError);
    cfg.dt = 1e-9;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(cfg.steps(), ValidationError);
    cfg.dt = 1e-3;
    cfg.t_end = -1.0;
    CHECK_THROWS_AS(cfg.steps(), ValidationError);
    cfg.t_end = 22e-3;
    CHECK(cfg.steps() == 22);
}

TEST_CASE("divergence and singular systems") {
    DAESystem grow;
    grow.layout.size = 1;
    grow.E = SparseMatrix::identity(1);
    grow.A = SparseMatrix::identity(1).scaled(-1e3);
    StepperConfig cfg;
    cfg.t_end = 0.1;
    cfg.dt = 5e-4;
    cfg.initial = InitialState::Provided;
    cfg.y0 = Vector::Ones(1);
    const auto ts = integrate(grow, cfg);
    CHECK(ts.diverged);
    // growth factor 2 per step reaches 1e12 after 40 steps
    CHECK(ts.divergence_step == 40);
    CHECK(ts.size() == 40);

    DAESystem dead;
    dead.layout.size = 1;
    dead.E = SparseMatrix(1, 1);
    dead.A = SparseMatrix(1, 1);
    CHECK_THROWS_AS(integrate(dead, cfg), SingularSystemAtStep);
}

TEST_CASE("runs are bit-identical") {
    const auto dae = stamp("V1 1 0 PSIN 1 50 1e-3 6.283185307179586e10\nR1 1 2 0.5\nL1 2 0 2e-3\nC1 2 0 1e-4\n");
    StepperConfig cfg;
    cfg.t_end = 5e-3;
    cfg.dt = 1e-5;
    const auto a = integrate(dae, cfg);
    const auto b = integrate(dae, cfg);
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t p = 0; p < a.traces.size(); ++p) {
        CHECK(a.traces[p].i == b.traces[p].i);
        CHECK(a.traces[p].v == b.traces[p].v);
    }
    CHECK(a.t == b.t);
}

TEST_CASE("voltage-driven foil element balances power") {
    FoilWindingSpec spec;
    const Mesh mesh = generate_parametric_mesh(geometry_for(spec), 8e-3);
    const auto disc = make_discretization(mesh);
    auto sys = std::make_shared<AssembledFoilSystem>(
        assemble_foil_system(mesh, spec, default_materials(spec), disc, VoltageBasis(BasisFamily::Legendre, 5)));
    FieldLibrary lib{{"w.foil", sys}};
    const auto dae = stamp("V1 1 0 SIN 1 50\nFW1 1 0 FILE w.foil MODE Ge\n", lib);
    StepperConfig cfg;
    cfg.t_end = 10e-3;
    cfg.dt = 1e-5;
    cfg.snapshot_stride = 1;
    cfg.probes = {"FW1"};
    const auto ts = integrate(dae, cfg);
    REQUIRE_FALSE(ts.diverged);
    const auto& fb = dae.layout.field_blocks.at(0);
    const DenseMatrix M = sys->M.to_dense();
    const DenseMatrix K = sys->K.to_dense();
    double balance = 0.0, scale = 0.0;
    for (std::size_t k = 11; k < ts.size(); ++k) {
        const Vector a1 = ts.snapshots[k].segment(fb.a_offset, fb.a_size);
        const Vector a0 = ts.snapshots[k - 1].segment(fb.a_offset, fb.a_size);
        const Vector u = ts.snapshots[k].segment(fb.u_offset, fb.u_size);
        const Vector adot = (a1 - a0) / cfg.dt;
        const double dW = 0.5 * (a1.dot(K * a1) - a0.dot(K * a0)) / cfg.dt;
        const double diss = adot.dot(M * adot) - 2.0 * adot.dot(sys->X * u) + u.dot(sys->G_e * u);
        const double p = ts.traces[0].i[k] * ts.traces[0].v[k];
        CHECK(diss >= -1e-9 * (std::abs(p) + 1.0));
        // implicit Euler adds 0.5 da^T K da / dt of numerical dissipation
        CHECK(p - dW - diss >= -1e-9 * (std::abs(p) + std::abs(dW) + diss));
        balance += std::abs(p - dW - diss);
        scale += std::abs(dW) + diss;
    }
    CHECK(balance <= 0.05 * scale);
}

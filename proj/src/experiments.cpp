#include "foilmqs/errors.hpp"
#include "foilmqs/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace foil {

namespace {

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double rms(const std::vector<double>& a) {
    if (a.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (const double x : a) {
        s += x * x;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

std::string source_line(const ExperimentConfig& cfg, Drive drive, double epsilon) {
    return std::string(drive == Drive::Voltage ? "V1" : "I1") + " 1 0 PSIN " + num(cfg.amplitude) + " " +
           num(cfg.frequency) + " " + num(epsilon) + " " + num(cfg.perturbation_frequency) + "\n";
}

}  // namespace

Mesh build_mesh(const ExperimentConfig& cfg, int level) {
    cfg.validate();
    return generate_parametric_mesh(cfg.geometry(), cfg.mesh_size(level));
}

AssembledFoilSystem build_system(const ExperimentConfig& cfg, const Mesh& mesh) {
    const auto disc = make_discretization(mesh);
    return assemble_foil_system(mesh, cfg.winding(), cfg.materials(), disc, VoltageBasis(cfg.basis, cfg.voltage_functions));
}

std::string foil_netlist(const ExperimentConfig& cfg, Drive drive, ConductanceMode mode, double epsilon) {
    return "* foil winding fed by a perturbed sine\n" + source_line(cfg, drive, epsilon) +
           "FW1 1 0 FILE winding MODE " + std::string(conductance_mode_name(mode)) + "\n.END\n";
}

SimulationRun simulate_foil(const ExperimentConfig& cfg, std::shared_ptr<const AssembledFoilSystem> sys, Drive drive,
                            ConductanceMode mode, double dt, double epsilon) {
    const Netlist net = parse_netlist(foil_netlist(cfg, drive, mode, epsilon));
    validate_netlist(net);
    const FieldLibrary lib{{"winding", std::move(sys)}};
    const DAESystem dae = mna_stamp(net, lib);
    StepperConfig sc;
    sc.t_end = cfg.duration;
    sc.dt = dt;
    sc.probes = {"FW1"};
    return {integrate(dae, sc)};
}

NoiseMetric noise_metric(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& reference,
                         double frequency, double window, int harmonics) {
    if (t.size() != y.size() || (!reference.empty() && reference.size() != y.size())) {
        throw ValidationError("noise metric: series lengths differ");
    }
    const auto n = static_cast<Index>(t.size());
    const auto start = static_cast<Index>(std::floor(static_cast<double>(n) * (1.0 - window)));
    const Index m = n - start;
    const Index cols = 1 + 2 * (1 + harmonics);
    NoiseMetric out;
    if (m < cols) {
        return out;
    }
    DenseMatrix basis(m, cols);
    Vector yy(m), dd(m);
    for (Index k = 0; k < m; ++k) {
        const auto s = static_cast<std::size_t>(start + k);
        basis(k, 0) = 1.0;
        for (int h = 1; h <= 1 + harmonics; ++h) {
            const double arg = 2.0 * std::numbers::pi * h * frequency * t[s];
            basis(k, 2 * h - 1) = std::cos(arg);
            basis(k, 2 * h) = std::sin(arg);
        }
        yy(k) = y[s];
        dd(k) = y[s] - (reference.empty() ? 0.0 : reference[s]);
    }
    const auto qr = basis.colPivHouseholderQr();
    const Vector cy = qr.solve(yy);
    out.amplitude = std::hypot(cy(1), cy(2));
    const Vector resid = dd - basis * qr.solve(dd);
    out.noise_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
    out.ratio = out.amplitude > 0.0 ? out.noise_rms / out.amplitude : 0.0;
    return out;
}

Fig4Result run_fig4(const ExperimentConfig& cfg, const std::vector<double>& steps) {
    const Mesh mesh = build_mesh(cfg, cfg.mesh_level);
    const auto sys = std::make_shared<const AssembledFoilSystem>(build_system(cfg, mesh));
    Fig4Result out;
    out.nodes = mesh.nodes().size();
    for (const double dt : steps) {
        Fig4Case c{dt,
                   simulate_foil(cfg, sys, Drive::Current, cfg.mode, dt, cfg.epsilon),
                   simulate_foil(cfg, sys, Drive::Voltage, cfg.mode, dt, cfg.epsilon),
                   {},
                   {}};
        // unperturbed twins isolate the response to the perturbation
        const auto ci = simulate_foil(cfg, sys, Drive::Current, cfg.mode, dt, 0.0);
        const auto cv = simulate_foil(cfg, sys, Drive::Voltage, cfg.mode, dt, 0.0);
        c.v_noise = noise_metric(c.current_driven.series.t, c.current_driven.winding().v, ci.winding().v, cfg.frequency);
        c.i_noise = noise_metric(c.voltage_driven.series.t, c.voltage_driven.winding().i, cv.winding().i, cfg.frequency);
        out.cases.push_back(std::move(c));
    }
    if (out.cases.size() >= 2) {
        const auto& coarse_dt = *std::max_element(out.cases.begin(), out.cases.end(),
                                                  [](const Fig4Case& a, const Fig4Case& b) { return a.dt < b.dt; });
        const auto& fine_dt = *std::min_element(out.cases.begin(), out.cases.end(),
                                                [](const Fig4Case& a, const Fig4Case& b) { return a.dt < b.dt; });
        out.v_noise_growth = coarse_dt.v_noise.noise_rms > 0.0 ? fine_dt.v_noise.noise_rms / coarse_dt.v_noise.noise_rms : 0.0;
    }
    return out;
}

Fig5Result run_fig5(const ExperimentConfig& cfg, double dt) {
    Fig5Result out;
    for (const int level : {cfg.coarse_level, cfg.fine_level}) {
        const Mesh mesh = build_mesh(cfg, level);
        const auto sys = std::make_shared<const AssembledFoilSystem>(build_system(cfg, mesh));
        Fig5Mesh fm{level, mesh.nodes().size(), simulate_foil(cfg, sys, Drive::Current, ConductanceMode::G, dt, cfg.epsilon),
                    simulate_foil(cfg, sys, Drive::Current, ConductanceMode::Ge, dt, cfg.epsilon), 0.0};
        const auto& vg = fm.g.winding().v;
        const auto& ve = fm.ge.winding().v;
        const std::size_t n = std::min(vg.size(), ve.size());
        std::vector<double> diff(n), ref(ve.begin(), ve.begin() + static_cast<std::ptrdiff_t>(n));
        for (std::size_t k = 0; k < n; ++k) {
            diff[k] = vg[k] - ve[k];
        }
        const double r = rms(ref);
        fm.discrepancy = r > 0.0 ? rms(diff) / r : 0.0;
        out.meshes.push_back(std::move(fm));
    }
    return out;
}

ClassifyReport run_classify(const ExperimentConfig& cfg, int level) {
    Mesh mesh = build_mesh(cfg, level);
    const auto sys = build_system(cfg, mesh);
    ClassifyReport rep;
    rep.ge = classify_element(sys, ConductanceMode::Ge);
    rep.g = classify_element(sys, ConductanceMode::G);
    for (int k = 0; k < 3; ++k) {
        if (k > 0) {
            mesh = refine_uniform(mesh);
        }
        const auto s = k == 0 ? sys : build_system(cfg, mesh);
        rep.difference_trend.push_back((s.G - s.G_e).norm());
        rep.trend_nodes.push_back(mesh.nodes().size());
    }
    std::string text = "mesh_level = " + std::to_string(level) + "\nnodes = " + std::to_string(rep.trend_nodes[0]) +
                       "\nfield_dofs = " + std::to_string(sys.field_dofs()) + "\n\n[Ge]\n" + format_classification(rep.ge) +
                       "\n[G]\n" + format_classification(rep.g) + "\n[refinement]\n";
    for (std::size_t k = 0; k < rep.difference_trend.size(); ++k) {
        text += "refinement_" + std::to_string(k) + " nodes = " + std::to_string(rep.trend_nodes[k]) +
                ", norm_G_minus_Ge = " + num(rep.difference_trend[k]) + "\n";
    }
    bool nonincreasing = true;
    for (std::size_t k = 1; k < rep.difference_trend.size(); ++k) {
        nonincreasing = nonincreasing && rep.difference_trend[k] <= rep.difference_trend[k - 1];
    }
    text += std::string("trend_nonincreasing = ") + (nonincreasing ? "true" : "false") + "\n";
    rep.text = std::move(text);
    return rep;
}

InductorDemo run_inductor_demo(const ExperimentConfig& cfg, double L) {
    InductorDemo d;
    d.L = L;
    const std::string inductor = "L1 1 0 " + num(L) + "\n";
    StepperConfig sc;
    sc.t_end = cfg.duration;
    sc.dt = cfg.dt;
    sc.probes = {"L1"};
    auto run = [&](Drive drive, double eps) {
        const Netlist net = parse_netlist(source_line(cfg, drive, eps) + inductor);
        validate_netlist(net);
        return integrate(mna_stamp(net), sc);
    };
    d.voltage_driven = run(Drive::Voltage, cfg.epsilon);
    d.current_driven = run(Drive::Current, cfg.epsilon);
    const TimeSeries twin = run(Drive::Current, 0.0);
    d.v_noise = noise_metric(d.current_driven.t, d.current_driven.trace("L1").v, twin.trace("L1").v, cfg.frequency);
    d.backward_bound = L * 2.0 * cfg.epsilon * cfg.amplitude / cfg.dt;
    return d;
}

}  // namespace foil

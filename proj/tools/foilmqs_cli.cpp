#include "foilmqs/errors.hpp"
#include "foilmqs/experiments.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace foil;

namespace {

struct Options {
    std::string config_path;
    int mesh_level = -1;
    std::string mode;
    std::string drive;
    double dt = 0.0;
    double t_end = 0.0;
    std::string out_dir = "out";
    std::string out_file;
    std::string format = "both";
    std::uint64_t seed = 0;
    std::string input;
};

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig make_config(const Options& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.mesh_level >= 0) {
        cfg.mesh_level = o.mesh_level;
    }
    if (!o.mode.empty()) {
        cfg.set("mode", o.mode);
    }
    if (!o.drive.empty()) {
        cfg.drive = parse_drive(o.drive);
    }
    if (o.dt > 0.0) {
        cfg.dt = o.dt;
    }
    if (o.t_end > 0.0) {
        cfg.duration = o.t_end;
    }
    if (o.seed != 0) {
        cfg.seed = o.seed;
    }
    cfg.validate();
    return cfg;
}

bool want_csv(const Options& o) { return o.format == "csv" || o.format == "both"; }
bool want_svg(const Options& o) { return o.format == "svg" || o.format == "both"; }

fs::path out_dir(const Options& o) {
    fs::path p(o.out_dir);
    fs::create_directories(p);
    return p;
}

std::vector<double> scaled(const std::vector<double>& v, double f) {
    std::vector<double> out(v);
    for (double& x : out) {
        x *= f;
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out << text;
}

void print_noise(const char* what, const NoiseMetric& m) {
    std::cout << "  " << what << ": amplitude = " << num(m.amplitude) << ", noise_rms = " << num(m.noise_rms)
              << ", ratio = " << num(m.ratio) << '\n';
}

int cmd_mesh_gen(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    write_text(o.out_file, write_mesh(build_mesh(cfg, cfg.mesh_level)));
    return 0;
}

int cmd_mesh_refine(const Options& o) {
    write_text(o.out_file, write_mesh(refine_uniform(read_mesh(read_file(o.input)))));
    return 0;
}

int cmd_mesh_info(const Options& o) {
    const Mesh mesh = read_mesh(read_file(o.input));
    std::cout << "nodes = " << mesh.nodes().size() << "\ntriangles = " << mesh.triangles().size()
              << "\nedges = " << mesh.edge_count() << '\n';
    for (const Region r : {Region::Air, Region::Yoke, Region::AirGap, Region::FoilWinding}) {
        std::cout << region_name(r) << "_triangles = " << mesh.region_triangle_count(r) << ", " << region_name(r)
                  << "_area = " << num(mesh.region_area(r)) << '\n';
    }
    return 0;
}

int cmd_assemble(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    const Mesh mesh = o.input.empty() ? build_mesh(cfg, cfg.mesh_level) : read_mesh(read_file(o.input));
    const auto sys = build_system(cfg, mesh);
    const std::string path = o.out_file.empty() ? "winding.foil" : o.out_file;
    save_foil_system(sys, path);
    std::cout << "nodes = " << mesh.nodes().size() << "\nfield_dofs = " << sys.field_dofs()
              << "\nvoltage_dofs = " << sys.voltage_dofs() << "\nnorm_G_minus_Ge = " << num((sys.G - sys.G_e).norm())
              << "\nwritten = " << path << '\n';
    return 0;
}

int cmd_classify(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    std::cout << run_classify(cfg, cfg.mesh_level).text;
    return 0;
}

void emit_series(const Options& o, const fs::path& dir, const std::string& stem, const TimeSeries& ts) {
    for (const auto& tr : ts.traces) {
        if (want_csv(o)) {
            write_csv((dir / (stem + tr.name + ".csv")).string(), ts.t, tr);
        }
    }
    if (want_svg(o)) {
        std::vector<PlotSeries> v, i;
        for (const auto& tr : ts.traces) {
            v.push_back({tr.name, scaled(ts.t, 1e3), tr.v});
            i.push_back({tr.name, scaled(ts.t, 1e3), tr.i});
        }
        write_svg((dir / (stem + "voltage.svg")).string(), "Branch voltages", "Time (ms)", "Voltage (V)", v);
        write_svg((dir / (stem + "current.svg")).string(), "Branch currents", "Time (ms)", "Current (A)", i);
    }
    if (ts.diverged) {
        std::cout << "diverged at step " << ts.divergence_step << '\n';
    }
}

int cmd_simulate(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    const fs::path dir = out_dir(o);
    if (o.input.empty()) {
        const Mesh mesh = build_mesh(cfg, cfg.mesh_level);
        const auto sys = std::make_shared<const AssembledFoilSystem>(build_system(cfg, mesh));
        const auto run = simulate_foil(cfg, sys, cfg.drive, cfg.mode, cfg.dt, cfg.epsilon);
        emit_series(o, dir, "", run.series);
        std::cout << "nodes = " << mesh.nodes().size() << "\nsteps = " << run.series.size() - 1 << '\n';
        return 0;
    }
    const Netlist net = parse_netlist(read_file(o.input));
    validate_netlist(net);
    const FieldLibrary lib = load_field_library(net, fs::path(o.input).parent_path().string());
    ElementClasses classes;
    for (const auto& b : net.branches) {
        if (b.kind == BranchKind::FieldElement) {
            ClassifyOptions opt;
            opt.compute_inductance = false;
            classes[b.name] = circuit_class(classify_element(*lib.at(b.field_path), b.mode, opt));
        }
    }
    std::cout << "predicted_index = " << predict_index(net, classes) << '\n';
    StepperConfig sc;
    sc.t_end = cfg.duration;
    sc.dt = cfg.dt;
    const auto ts = integrate(mna_stamp(net, lib), sc);
    emit_series(o, dir, "", ts);
    std::cout << "steps = " << ts.size() - 1 << '\n';
    return 0;
}

int cmd_fig4(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    const fs::path dir = out_dir(o);
    const auto res = run_fig4(cfg);
    std::cout << "nodes = " << res.nodes << '\n';
    std::vector<PlotSeries> v_plot, i_plot;
    for (const auto& c : res.cases) {
        std::cout << "dt = " << num(c.dt) << '\n';
        print_noise("current-driven v", c.v_noise);
        print_noise("voltage-driven i", c.i_noise);
        const std::string tag = "dt" + num(c.dt);
        if (want_csv(o)) {
            write_csv((dir / ("fig4_current_driven_" + tag + ".csv")).string(), c.current_driven.series.t,
                      c.current_driven.winding());
            write_csv((dir / ("fig4_voltage_driven_" + tag + ".csv")).string(), c.voltage_driven.series.t,
                      c.voltage_driven.winding());
        }
        v_plot.push_back({"dt = " + num(c.dt) + " s", scaled(c.current_driven.series.t, 1e3), c.current_driven.winding().v});
        i_plot.push_back({"dt = " + num(c.dt) + " s", scaled(c.voltage_driven.series.t, 1e3), c.voltage_driven.winding().i});
    }
    std::cout << "v_noise_growth = " << num(res.v_noise_growth) << '\n';
    if (want_svg(o)) {
        write_svg((dir / "fig4_current_driven.svg").string(), "Current-driven foil winding", "Time (ms)", "Voltage (V)",
                  v_plot);
        write_svg((dir / "fig4_voltage_driven.svg").string(), "Voltage-driven foil winding", "Time (ms)", "Current (A)",
                  i_plot);
    }
    return 0;
}

int cmd_fig5(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    const fs::path dir = out_dir(o);
    const double dt = o.dt > 0.0 ? o.dt : 1e-4;
    const auto res = run_fig5(cfg, dt);
    for (const auto& m : res.meshes) {
        const std::string tag = "level" + std::to_string(m.level);
        std::cout << tag << ": nodes = " << m.nodes << ", discrepancy = " << num(m.discrepancy)
                  << ", G_diverged = " << (m.g.series.diverged ? "true" : "false")
                  << ", Ge_diverged = " << (m.ge.series.diverged ? "true" : "false") << '\n';
        if (want_csv(o)) {
            write_csv((dir / ("fig5_" + tag + "_G.csv")).string(), m.g.series.t, m.g.winding());
            write_csv((dir / ("fig5_" + tag + "_Ge.csv")).string(), m.ge.series.t, m.ge.winding());
        }
        if (want_svg(o)) {
            write_svg((dir / ("fig5_" + tag + ".svg")).string(), std::to_string(m.nodes) + " nodes", "Time (ms)",
                      "Voltage (V)",
                      {{"G", scaled(m.g.series.t, 1e3), m.g.winding().v},
                       {"Ge", scaled(m.ge.series.t, 1e3), m.ge.winding().v}});
        }
    }
    return 0;
}

int cmd_demo_inductor(const Options& o) {
    const ExperimentConfig cfg = make_config(o);
    const fs::path dir = out_dir(o);
    const auto d = run_inductor_demo(cfg);
    std::cout << "L = " << num(d.L) << "\ndt = " << num(cfg.dt) << '\n';
    print_noise("current-driven v", d.v_noise);
    std::cout << "backward_difference_bound = " << num(d.backward_bound)
              << "\nnoise_over_bound = " << num(d.v_noise.noise_rms / d.backward_bound) << '\n';
    emit_series(o, dir, "inductor_voltage_driven_", d.voltage_driven);
    emit_series(o, dir, "inductor_current_driven_", d.current_driven);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Axisymmetric foil winding field-circuit simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--mesh-level", o.mesh_level, "mesh level (0 = coarse)")->check(CLI::NonNegativeNumber);
    app.add_option("--mode", o.mode, "conductance matrix: G, Ge or SOLID");
    app.add_option("--drive", o.drive, "source type: v or i")->check(CLI::IsMember({"v", "i"}));
    app.add_option("--dt", o.dt, "time step in s")->check(CLI::PositiveNumber);
    app.add_option("--t-end", o.t_end, "simulated duration in s")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out_dir, "output directory");
    app.add_option("--format", o.format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));
    app.add_option("--seed", o.seed, "seed for randomized runs");

    std::function<int()> action;
    auto* mesh = app.add_subcommand("mesh", "generate, refine or inspect meshes");
    mesh->require_subcommand(1);
    auto* gen = mesh->add_subcommand("gen", "generate the transformer mesh");
    gen->add_option("-o,--output", o.out_file, "mesh file (stdout if omitted)");
    gen->callback([&] { action = [&] { return cmd_mesh_gen(o); }; });
    auto* refine = mesh->add_subcommand("refine", "uniformly refine a mesh");
    refine->add_option("input", o.input)->required()->check(CLI::ExistingFile);
    refine->add_option("-o,--output", o.out_file, "mesh file (stdout if omitted)");
    refine->callback([&] { action = [&] { return cmd_mesh_refine(o); }; });
    auto* info = mesh->add_subcommand("info", "print mesh statistics");
    info->add_option("input", o.input)->required()->check(CLI::ExistingFile);
    info->callback([&] { action = [&] { return cmd_mesh_info(o); }; });

    auto* assemble = app.add_subcommand("assemble", "assemble and store the foil winding system");
    assemble->add_option("--mesh", o.input, "mesh file instead of the generated mesh")->check(CLI::ExistingFile);
    assemble->add_option("-o,--output", o.out_file, "system file (default winding.foil)");
    assemble->callback([&] { action = [&] { return cmd_assemble(o); }; });

    app.add_subcommand("classify", "classify the foil element in both conductance modes")->callback([&] {
        action = [&] { return cmd_classify(o); };
    });

    auto* simulate = app.add_subcommand("simulate", "time-domain simulation of a netlist or the configured winding");
    simulate->add_option("netlist", o.input, "netlist file")->check(CLI::ExistingFile);
    simulate->callback([&] { action = [&] { return cmd_simulate(o); }; });

    app.add_subcommand("fig4", "perturbation study for both drives")->callback([&] {
        action = [&] { return cmd_fig4(o); };
    });
    app.add_subcommand("fig5", "G versus Ge on the coarse and fine mesh")->callback([&] {
        action = [&] { return cmd_fig5(o); };
    });
    app.add_subcommand("demo-inductor", "lumped inductor under perturbed drives")->callback([&] {
        action = [&] { return cmd_demo_inductor(o); };
    });

    CLI11_PARSE(app, argc, argv);
    try {
        return action ? action() : 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#pragma once

#include "foilmqs/dae_analysis.hpp"
#include "foilmqs/timestepper.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace foil {

enum class Drive { Voltage, Current };

std::string_view drive_name(Drive drive);
Drive parse_drive(std::string_view name);   // "v"/"voltage" or "i"/"current"

/// Experiment parameters in SI units. Defaults are the transformer of the
/// reference study: 50 foils, five voltage functions, 50 Hz drive.
struct ExperimentConfig {
    int voltage_functions = 5;
    int turns = 50;
    double fill_factor = 0.8;
    double foil_pitch = 0.28e-3;
    double foil_height = 50e-3;
    double air_gap = 4.2e-3;
    double yoke_height = 76.2e-3;
    double yoke_outer_radius = 40e-3;
    double frequency = 50.0;
    double perturbation_frequency = 2.0 * 3.14159265358979323846 * 1e10;
    double epsilon = 1e-3;
    double winding_sigma = 6e7;
    double yoke_sigma = 10.0;
    double yoke_mu_r = 1000.0;
    double amplitude = 1.0;

    Drive drive = Drive::Voltage;
    ConductanceMode mode = ConductanceMode::Ge;
    BasisFamily basis = BasisFamily::Legendre;
    double coarse_mesh_size = 8e-3;   // level n uses coarse_mesh_size / (n + 1)
    int mesh_level = 4;
    int coarse_level = 0;
    int fine_level = 4;
    double dt = 1e-5;
    double duration = 22e-3;
    std::uint64_t seed = 1;

    FoilWindingSpec winding() const;
    GeometrySpec geometry() const;
    MaterialSpec materials() const;
    double mesh_size(int level) const;

    /// Throws ValidationError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    /// Every key as `key = value`, fixed order, round-trip precision.
    std::string to_text() const;
    /// FNV-1a of to_text().
    std::uint64_t hash() const;
};

/// Flat `key = value` text, '#' comments; unspecified keys keep their defaults.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

Mesh build_mesh(const ExperimentConfig& cfg, int level);
AssembledFoilSystem build_system(const ExperimentConfig& cfg, const Mesh& mesh);

/// Source feeding a single foil element named FW1 (library key "winding").
std::string foil_netlist(const ExperimentConfig& cfg, Drive drive, ConductanceMode mode, double epsilon);

struct SimulationRun {
    TimeSeries series;    // probes FW1
    const BranchTrace& winding() const { return series.trace("FW1"); }
};

SimulationRun simulate_foil(const ExperimentConfig& cfg, std::shared_ptr<const AssembledFoilSystem> sys, Drive drive,
                            ConductanceMode mode, double dt, double epsilon);

struct NoiseMetric {
    double amplitude = 0.0;   // fitted fundamental
    double noise_rms = 0.0;
    double ratio = 0.0;       // noise_rms / amplitude
};

/// Over the final `window` fraction of samples: the fundamental amplitude is
/// fitted to `y`; the noise is the RMS of y - reference after removing a
/// least-squares fit of a constant, the fundamental and `harmonics` further
/// harmonics. An empty reference means zero.
NoiseMetric noise_metric(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& reference,
                         double frequency, double window = 0.6, int harmonics = 3);

struct Fig4Case {
    double dt;
    SimulationRun current_driven;
    SimulationRun voltage_driven;
    NoiseMetric v_noise;   // current-driven terminal voltage
    NoiseMetric i_noise;   // voltage-driven terminal current
};

struct Fig4Result {
    std::size_t nodes = 0;
    std::vector<Fig4Case> cases;   // dt = 1e-4 then 1e-5
    double v_noise_growth = 0.0;   // noise_rms(v) at the smallest dt over the largest
};

Fig4Result run_fig4(const ExperimentConfig& cfg, const std::vector<double>& steps = {1e-4, 1e-5});

struct Fig5Mesh {
    int level;
    std::size_t nodes;
    SimulationRun g;
    SimulationRun ge;
    double discrepancy;   // RMS(v_G - v_Ge) / RMS(v_Ge) over the common samples
};

struct Fig5Result {
    std::vector<Fig5Mesh> meshes;   // coarse then fine
};

Fig5Result run_fig5(const ExperimentConfig& cfg, double dt = 1e-4);

struct ClassifyReport {
    Classification ge;
    Classification g;
    std::vector<double> difference_trend;   // ||G - G_e||_F on 3 uniform refinements
    std::vector<std::size_t> trend_nodes;
    std::string text;
};

ClassifyReport run_classify(const ExperimentConfig& cfg, int level);

struct InductorDemo {
    double L;
    TimeSeries voltage_driven;
    TimeSeries current_driven;
    NoiseMetric v_noise;       // current-driven
    double backward_bound;     // L * 2 * eps * amplitude / dt
};

InductorDemo run_inductor_demo(const ExperimentConfig& cfg, double L = 1e-3);

// Output.
void write_csv(std::ostream& out, const std::vector<double>& t, const BranchTrace& trace);
void write_csv(const std::string& path, const std::vector<double>& t, const BranchTrace& trace);

struct CsvSeries {
    std::vector<double> t, i, v;
};
CsvSeries read_csv(std::istream& in);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static line plot; one polyline per series, non-finite samples break the line.
void write_svg(std::ostream& out, const std::string& title, const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series);
void write_svg(const std::string& path, const std::string& title, const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series);

}  // namespace foil

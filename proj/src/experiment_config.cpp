#include "foilmqs/errors.hpp"
#include "foilmqs/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace foil {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ValidationError("key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ValidationError("key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define FOIL_DOUBLE(name)                                                                              \
    Field {                                                                                            \
        #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_double(#name, v); },     \
            [](const ExperimentConfig& c) { return format_double(c.name); }                            \
    }
#define FOIL_INT(name, type)                                                                           \
    Field {                                                                                            \
        #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_int<type>(#name, v); },  \
            [](const ExperimentConfig& c) { return std::to_string(c.name); }                           \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        FOIL_INT(voltage_functions, int),
        FOIL_INT(turns, int),
        FOIL_DOUBLE(fill_factor),
        FOIL_DOUBLE(foil_pitch),
        FOIL_DOUBLE(foil_height),
        FOIL_DOUBLE(air_gap),
        FOIL_DOUBLE(yoke_height),
        FOIL_DOUBLE(yoke_outer_radius),
        FOIL_DOUBLE(frequency),
        FOIL_DOUBLE(perturbation_frequency),
        FOIL_DOUBLE(epsilon),
        FOIL_DOUBLE(winding_sigma),
        FOIL_DOUBLE(yoke_sigma),
        FOIL_DOUBLE(yoke_mu_r),
        FOIL_DOUBLE(amplitude),
        Field{"drive", [](ExperimentConfig& c, const std::string& v) { c.drive = parse_drive(v); },
              [](const ExperimentConfig& c) { return std::string(drive_name(c.drive)); }},
        Field{"mode",
              [](ExperimentConfig& c, const std::string& v) {
                  try {
                      c.mode = parse_conductance_mode(v);
                  } catch (const Error&) {
                      throw ValidationError("key 'mode': expected G, Ge or SOLID, got '" + v + "'");
                  }
              },
              [](const ExperimentConfig& c) { return std::string(conductance_mode_name(c.mode)); }},
        Field{"basis",
              [](ExperimentConfig& c, const std::string& v) {
                  try {
                      c.basis = parse_basis_family(v);
                  } catch (const Error&) {
                      throw ValidationError("key 'basis': expected legendre or hat, got '" + v + "'");
                  }
              },
              [](const ExperimentConfig& c) { return std::string(basis_family_name(c.basis)); }},
        FOIL_DOUBLE(coarse_mesh_size),
        FOIL_INT(mesh_level, int),
        FOIL_INT(coarse_level, int),
        FOIL_INT(fine_level, int),
        FOIL_DOUBLE(dt),
        FOIL_DOUBLE(duration),
        FOIL_INT(seed, std::uint64_t),
    };
    return table;
}

#undef FOIL_DOUBLE
#undef FOIL_INT

}  // namespace

std::string_view drive_name(Drive drive) { return drive == Drive::Voltage ? "v" : "i"; }

Drive parse_drive(std::string_view name) {
    if (name == "v" || name == "voltage") {
        return Drive::Voltage;
    }
    if (name == "i" || name == "current") {
        return Drive::Current;
    }
    throw ValidationError("drive must be v or i, got '" + std::string(name) + "'");
}

FoilWindingSpec ExperimentConfig::winding() const {
    FoilWindingSpec s;
    s.turns = turns;
    s.fill_factor = fill_factor;
    s.pitch = foil_pitch;
    s.height = foil_height;
    s.sigma_conductor = winding_sigma;
    return s;
}

GeometrySpec ExperimentConfig::geometry() const {
    GeometrySpec g;
    g.outer_radius = yoke_outer_radius;
    g.height = yoke_height;
    g.air_gap = air_gap;
    return geometry_for(winding(), g);
}

MaterialSpec ExperimentConfig::materials() const { return default_materials(winding(), yoke_sigma, yoke_mu_r); }

double ExperimentConfig::mesh_size(int level) const { return coarse_mesh_size / (level + 1); }

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(*this, value);
            return;
        }
    }
    throw ValidationError("unknown configuration key '" + key + "'");
}

void ExperimentConfig::validate() const {
    winding().validate();
    geometry().validate();
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0)) {
            throw ValidationError(std::string(name) + " must be positive");
        }
    };
    positive("frequency", frequency);
    positive("perturbation_frequency", perturbation_frequency);
    positive("yoke_mu_r", yoke_mu_r);
    positive("coarse_mesh_size", coarse_mesh_size);
    positive("dt", dt);
    positive("duration", duration);
    if (voltage_functions < 1) {
        throw ValidationError("voltage_functions must be at least 1");
    }
    if (epsilon < 0.0 || yoke_sigma < 0.0) {
        throw ValidationError("epsilon and yoke_sigma must be nonnegative");
    }
    if (mesh_level < 0 || coarse_level < 0 || fine_level < 0) {
        throw ValidationError("mesh levels must be nonnegative");
    }
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.get(*this);
        out += '\n';
    }
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char ch : to_text()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        try {
            base.set(key, value);
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open configuration '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

}  // namespace foil

#include "magopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "magopt/errors.hpp"
#include "magopt/materials.hpp"
#include "magopt/objective.hpp"

namespace magopt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct KeyValue {
    std::map<std::string, std::string> entries;  // "section.key" -> value
    std::map<std::string, int> lines;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    double number(const std::string& key, double fallback) const {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != it->second.size()) {
            throw ValidationError("config line " + std::to_string(lines.at(key)) + ": key '" +
                                  key + "' is not a number ('" + it->second + "')");
        }
        return v;
    }

    int integer(const std::string& key, int fallback) const {
        const double v = number(key, static_cast<double>(fallback));
        if (v != std::floor(v)) {
            throw ValidationError("config: key '" + key + "' must be an integer");
        }
        return static_cast<int>(v);
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw ValidationError("config: key '" + key + "' must be a boolean");
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = entries.find(key);
        return it == entries.end() ? fallback : it->second;
    }
};

KeyValue read_key_values(std::istream& in) {
    KeyValue kv;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        kv.entries[full] = value;
        kv.lines[full] = line_no;
    }
    return kv;
}

}  // namespace

void RunConfig::validate() const {
    geometry.validate();
    if (!(mesh_h > 0.0)) throw ValidationError("config: geometry.h must be positive");
    if (!(nu0 > 0.0)) throw ValidationError("config: material.nu0 must be positive");
    if (!(nu_r > 0.0) || nu_r > 1.0) {
        throw ValidationError("config: material.nu_r must lie in (0, 1]");
    }
    if (curve != "analytic" && curve != "table") {
        throw ValidationError("config: material.curve must be 'analytic' or 'table'");
    }
    if (curve == "table" && bh_table_path.empty()) {
        throw ValidationError("config: material.curve = table requires material.bh_table");
    }
    if (n_quadrature < 8) throw ValidationError("config: objective.n_quadrature must be >= 8");
    if (tangent_sign != 1.0 && tangent_sign != -1.0) {
        throw ValidationError("config: objective.tangent_sign must be +1 or -1");
    }
    if (!(solver.linear_tol > 0.0) || !(solver.newton_tol > 0.0)) {
        throw ValidationError("config: solver tolerances must be positive");
    }
    optimizer.validate();
    if (out_dir.empty()) throw ValidationError("config: output.dir must not be empty");
}

Mesh RunConfig::make_mesh() const {
    if (!mesh_path.empty()) return load_mesh_file(mesh_path);
    return generate_motor_mesh(geometry, mesh_h);
}

BHModel RunConfig::make_model() const {
    if (curve == "table") return load_bh_table_csv(bh_table_path, nu0, nu_r);
    return BHModel::analytic(nu0, nu_r, curve_s0, curve_exponent);
}

TargetCurve RunConfig::make_target() const {
    return TargetCurve::sine(target_amplitude, target_frequency);
}

GapCircle RunConfig::make_gap(const Mesh& mesh) const {
    return build_gap_circle(mesh, geometry.r_gap_circle, n_quadrature, tangent_sign);
}

RunConfig parse_config(std::istream& in) {
    const KeyValue kv = read_key_values(in);
    RunConfig cfg;

    cfg.geometry.r_shaft = kv.number("geometry.r_shaft", cfg.geometry.r_shaft);
    cfg.geometry.r_rotor_iron = kv.number("geometry.r_rotor_iron", cfg.geometry.r_rotor_iron);
    cfg.geometry.r_magnet_outer =
        kv.number("geometry.r_magnet_outer", cfg.geometry.r_magnet_outer);
    cfg.geometry.r_rotor_surface =
        kv.number("geometry.r_rotor_surface", cfg.geometry.r_rotor_surface);
    cfg.geometry.r_gap_circle = kv.number("geometry.r_gap_circle", cfg.geometry.r_gap_circle);
    cfg.geometry.r_stator_bore = kv.number("geometry.r_stator_bore", cfg.geometry.r_stator_bore);
    cfg.geometry.r_stator_yoke = kv.number("geometry.r_stator_yoke", cfg.geometry.r_stator_yoke);
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    cfg.geometry.magnet_span = kv.number("geometry.magnet_span_deg",
                                         cfg.geometry.magnet_span / kDeg) * kDeg;
    cfg.geometry.magnet_centers[0] =
        kv.number("geometry.magnet_center1_deg", cfg.geometry.magnet_centers[0] / kDeg) * kDeg;
    cfg.geometry.magnet_centers[1] =
        kv.number("geometry.magnet_center2_deg", cfg.geometry.magnet_centers[1] / kDeg) * kDeg;
    cfg.geometry.magnet_strength =
        kv.number("geometry.magnet_strength", cfg.geometry.magnet_strength);
    cfg.mesh_h = kv.number("geometry.h", cfg.mesh_h);
    cfg.mesh_path = kv.text("geometry.mesh", cfg.mesh_path);

    const std::string mode = kv.text("material.mode", "linear");
    if (mode == "linear") {
        cfg.mode = MaterialMode::Linear;
    } else if (mode == "nonlinear") {
        cfg.mode = MaterialMode::Nonlinear;
    } else {
        throw ValidationError("config: material.mode must be 'linear' or 'nonlinear'");
    }
    cfg.nu0 = kv.number("material.nu0", cfg.nu0);
    cfg.nu_r = kv.number("material.nu_r", cfg.nu_r);
    cfg.curve = kv.text("material.curve", cfg.curve);
    cfg.curve_s0 = kv.number("material.s0", cfg.curve_s0);
    cfg.curve_exponent = kv.number("material.exponent", cfg.curve_exponent);
    cfg.bh_table_path = kv.text("material.bh_table", cfg.bh_table_path);

    cfg.target_amplitude = kv.number("objective.target_amplitude", cfg.target_amplitude);
    cfg.target_frequency = kv.number("objective.target_frequency", cfg.target_frequency);
    cfg.n_quadrature = kv.integer("objective.n_quadrature", cfg.n_quadrature);
    cfg.tangent_sign = kv.number("objective.tangent_sign", cfg.tangent_sign);

    cfg.solver.linear_tol = kv.number("solver.linear_tol", cfg.solver.linear_tol);
    cfg.solver.newton_tol = kv.number("solver.newton_tol", cfg.solver.newton_tol);
    cfg.solver.max_newton_iters =
        kv.integer("solver.max_newton_iters", cfg.solver.max_newton_iters);
    cfg.solver.max_backtracks = kv.integer("solver.max_backtracks", cfg.solver.max_backtracks);

    cfg.optimizer.max_iters = kv.integer("optimizer.max_iters", cfg.optimizer.max_iters);
    cfg.optimizer.radius0 = kv.number("optimizer.radius0", cfg.optimizer.radius0);
    cfg.optimizer.radius_decay = kv.number("optimizer.radius_decay", cfg.optimizer.radius_decay);
    cfg.optimizer.minima_per_iter =
        kv.integer("optimizer.minima_per_iter", cfg.optimizer.minima_per_iter);
    cfg.optimizer.negative_threshold =
        kv.number("optimizer.negative_threshold", cfg.optimizer.negative_threshold);
    cfg.optimizer.allow_switch_on =
        kv.boolean("optimizer.allow_switch_on", cfg.optimizer.allow_switch_on);
    cfg.optimizer.stop_stagnation =
        kv.integer("optimizer.stop_stagnation", cfg.optimizer.stop_stagnation);

    cfg.out_dir = kv.text("output.dir", cfg.out_dir);
    cfg.write_vtk = kv.boolean("output.write_vtk", cfg.write_vtk);
    cfg.write_snapshots = kv.boolean("output.write_snapshots", cfg.write_snapshots);

    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string dump_config(const RunConfig& cfg) {
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    std::ostringstream out;
    out.precision(17);
    out << "[geometry]\n";
    out << "r_shaft = " << cfg.geometry.r_shaft << "\n";
    out << "r_rotor_iron = " << cfg.geometry.r_rotor_iron << "\n";
    out << "r_magnet_outer = " << cfg.geometry.r_magnet_outer << "\n";
    out << "r_rotor_surface = " << cfg.geometry.r_rotor_surface << "\n";
    out << "r_gap_circle = " << cfg.geometry.r_gap_circle << "\n";
    out << "r_stator_bore = " << cfg.geometry.r_stator_bore << "\n";
    out << "r_stator_yoke = " << cfg.geometry.r_stator_yoke << "\n";
    out << "magnet_span_deg = " << cfg.geometry.magnet_span / kDeg << "\n";
    out << "magnet_center1_deg = " << cfg.geometry.magnet_centers[0] / kDeg << "\n";
    out << "magnet_center2_deg = " << cfg.geometry.magnet_centers[1] / kDeg << "\n";
    out << "magnet_strength = " << cfg.geometry.magnet_strength << "\n";
    out << "h = " << cfg.mesh_h << "\n";
    if (!cfg.mesh_path.empty()) out << "mesh = " << cfg.mesh_path << "\n";
    out << "\n[material]\n";
    out << "mode = " << (cfg.mode == MaterialMode::Linear ? "linear" : "nonlinear") << "\n";
    out << "nu0 = " << cfg.nu0 << "\n";
    out << "nu_r = " << cfg.nu_r << "\n";
    out << "curve = " << cfg.curve << "\n";
    out << "s0 = " << cfg.curve_s0 << "\n";
    out << "exponent = " << cfg.curve_exponent << "\n";
    if (!cfg.bh_table_path.empty()) out << "bh_table = " << cfg.bh_table_path << "\n";
    out << "\n[objective]\n";
    out << "target_amplitude = " << cfg.target_amplitude << "\n";
    out << "target_frequency = " << cfg.target_frequency << "\n";
    out << "n_quadrature = " << cfg.n_quadrature << "\n";
    out << "tangent_sign = " << cfg.tangent_sign << "\n";
    out << "\n[solver]\n";
    out << "linear_tol = " << cfg.solver.linear_tol << "\n";
    out << "newton_tol = " << cfg.solver.newton_tol << "\n";
    out << "max_newton_iters = " << cfg.solver.max_newton_iters << "\n";
    out << "max_backtracks = " << cfg.solver.max_backtracks << "\n";
    out << "\n[optimizer]\n";
    out << "max_iters = " << cfg.optimizer.max_iters << "\n";
    out << "radius0 = " << cfg.optimizer.radius0 << "\n";
    out << "radius_decay = " << cfg.optimizer.radius_decay << "\n";
    out << "minima_per_iter = " << cfg.optimizer.minima_per_iter << "\n";
    out << "negative_threshold = " << cfg.optimizer.negative_threshold << "\n";
    out << "allow_switch_on = " << (cfg.optimizer.allow_switch_on ? "true" : "false") << "\n";
    out << "stop_stagnation = " << cfg.optimizer.stop_stagnation << "\n";
    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    out << "write_vtk = " << (cfg.write_vtk ? "true" : "false") << "\n";
    out << "write_snapshots = " << (cfg.write_snapshots ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace magopt

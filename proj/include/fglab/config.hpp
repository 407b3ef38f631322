#pragma once

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fglab/heat1d.hpp>
#include <fglab/problem.hpp>
#include <fglab/solver.hpp>

namespace fglab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError(where + ": empty value");
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || !std::isfinite(x))
        throw ConfigError(where + ": cannot parse '" + v + "' as a finite decimal number");
    return x;
}

inline std::size_t parse_size(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty() || v[0] == '-' || v[0] == '+')
        throw ConfigError(where + ": expected an unsigned integer, got '" + v + "'");
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE)
        throw ConfigError(where + ": cannot parse '" + v + "' as an unsigned integer");
    return static_cast<std::size_t>(x);
}

/// Values split on spaces and/or commas, so "4,8,16" and "4 8 16" agree.
inline std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : raw) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::exchange(cur, {}));
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace detail

inline std::vector<double> parse_double_list(const std::string& raw, const std::string& where) {
    std::vector<double> out;
    for (const std::string& item : detail::split_list(raw)) out.push_back(detail::parse_double(item, where));
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& raw, const std::string& where) {
    std::vector<std::size_t> out;
    for (const std::string& item : detail::split_list(raw)) out.push_back(detail::parse_size(item, where));
    return out;
}

/// Sectioned key = value text.  Full-line comments start with '#' or ';';
/// duplicate keys and keys outside a section are rejected.
class IniDoc {
  public:
    static IniDoc parse(std::istream& in) {
        IniDoc doc;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            const std::string at = "config line " + std::to_string(lineno);
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw ConfigError(at + ": malformed section header '" + t + "'");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty()) throw ConfigError(at + ": empty section name");
                doc.sections_[section];
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value', got '" + t + "'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(at + ": empty key");
            if (section.empty()) throw ConfigError(at + ": key '" + key + "' appears before any [section]");
            auto [it, fresh] = doc.sections_[section].emplace(key, value);
            (void)it;
            if (!fresh) throw ConfigError(at + ": duplicate key '" + key + "' in [" + section + "]");
        }
        return doc;
    }

    static IniDoc parse_text(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    static IniDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse(in);
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Typed access with defaults; every read is recorded so unknown keys can
/// be reported as errors instead of being silently ignored.
class ConfigReader {
  public:
    explicit ConfigReader(const IniDoc& doc) : doc_(doc) {}

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = doc_.sections().find(sec);
        return s != doc_.sections().end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& sec, const std::string& key, const std::string& def) const {
        const std::string* raw = fetch(sec, key);
        return raw ? *raw : def;
    }

    double get_double(const std::string& sec, const std::string& key, double def) const {
        const std::string* raw = fetch(sec, key);
        return raw ? detail::parse_double(*raw, where(sec, key)) : def;
    }

    std::size_t get_size(const std::string& sec, const std::string& key, std::size_t def) const {
        const std::string* raw = fetch(sec, key);
        return raw ? detail::parse_size(*raw, where(sec, key)) : def;
    }

    std::vector<double> get_double_list(const std::string& sec, const std::string& key,
                                        std::vector<double> def) const {
        const std::string* raw = fetch(sec, key);
        return raw ? parse_double_list(*raw, where(sec, key)) : def;
    }

    std::vector<std::size_t> get_size_list(const std::string& sec, const std::string& key,
                                           std::vector<std::size_t> def) const {
        const std::string* raw = fetch(sec, key);
        return raw ? parse_size_list(*raw, where(sec, key)) : def;
    }

    /// Every present key must have been read by now.
    void require_consumed() const {
        for (const auto& [sec, kv] : doc_.sections())
            for (const auto& [key, value] : kv)
                if (!consumed_.count({sec, key}))
                    throw ConfigError("unknown key '" + key + "' in [" + sec + "]");
    }

  private:
    static std::string where(const std::string& sec, const std::string& key) {
        return "[" + sec + "] " + key;
    }

    const std::string* fetch(const std::string& sec, const std::string& key) const {
        const auto s = doc_.sections().find(sec);
        if (s == doc_.sections().end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        consumed_.insert({sec, key});
        return &k->second;
    }

    const IniDoc& doc_;
    mutable std::set<std::pair<std::string, std::string>> consumed_;
};

/// Fully assembled run description: the problem, the solver settings, and
/// the experiment-level knobs shared by the drivers.
struct ExperimentConfig {
    std::string problem_name;
    // Placeholder spectrum; load_experiment always installs the real one.
    ProblemSpec problem{dirichlet_spectrum(1), {}, {}, {}, {}};
    HeatInstancePtr instance;  ///< null when nothing needs the physical grid
    SolverConfig solver;
    std::vector<std::size_t> dims;
    std::size_t reference_dim = 0;
    std::size_t reference_refine = 1;
    std::uint64_t seed = 1;
    std::vector<double> snapshot_times;
    std::size_t oracle_points = 2000;
    double oracle_dt = 1e-4;
    double oracle_tolerance = 1e-3;

    void validate() const {
        problem.validate();
        solver.validate();
        if (dims.empty()) throw ConfigError("[experiment] dims must not be empty");
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (dims[i] == 0) throw ConfigError("[experiment] dims entries must be positive");
            if (i > 0 && dims[i] <= dims[i - 1])
                throw ConfigError("[experiment] dims must be strictly increasing");
        }
        if (reference_dim < 4 * dims.back())
            throw ConfigError("[experiment] reference_dim = " + std::to_string(reference_dim) +
                              " must be at least 4x the largest tested dimension " +
                              std::to_string(dims.back()));
        if (reference_refine == 0 || (reference_refine & (reference_refine - 1)) != 0)
            throw ConfigError("[experiment] reference_refine must be a power of two");
        if (problem.spectrum.size() <= reference_dim || problem.spectrum.size() <= solver.dim)
            throw ConfigError("spectrum does not cover the requested dimensions");
        for (double t : snapshot_times)
            if (!(t >= 0.0 && t <= problem.partition.horizon))
                throw ConfigError("[experiment] snapshots must lie in [0, horizon]");
        if (oracle_points < 100) throw ConfigError("[experiment] oracle_points must be at least 100");
        if (!(oracle_dt > 0.0)) throw ConfigError("[experiment] oracle_dt must be positive");
        if (!(oracle_tolerance > 0.0)) throw ConfigError("[experiment] oracle_tolerance must be positive");
    }
};

/// Command-line values that win over the file.  size_for_convergence makes
/// the kernel matrix cover the reference dimension, which only convergence
/// runs pay for.
struct ConfigOverrides {
    std::optional<std::vector<std::size_t>> dims;
    std::optional<double> dt;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    bool size_for_convergence = false;
};

inline ExperimentConfig load_experiment(const IniDoc& doc, const ConfigOverrides& o = {}) {
    const ConfigReader r(doc);
    ExperimentConfig ec;

    ec.problem.partition.horizon = r.get_double("partition", "horizon", 1.0);
    ec.problem.partition.delay = r.get_double("partition", "delay", 0.1);
    ec.problem.partition.onset = r.get_double_list("partition", "onset", {0.3, 0.6});
    ec.problem.partition.release = r.get_double_list("partition", "release", {0.4, 0.7});
    const TimePartition& part = ec.problem.partition;
    try {
        part.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[partition] ") + e.what());
    }

    ec.solver.dim = r.get_size("solver", "dim", 64);
    ec.solver.dt = o.dt.value_or(r.get_double("solver", "dt", 1e-3));
    ec.solver.alpha = o.alpha.value_or(r.get_double("solver", "alpha", 0.5));
    ec.solver.picard_tol = r.get_double("solver", "picard_tol", 1e-10);
    ec.solver.picard_max_iter = static_cast<int>(r.get_size("solver", "picard_max_iter", 200));
    ec.solver.refine = r.get_size("solver", "refine", 1);

    ec.dims = o.dims.value_or(r.get_size_list("experiment", "dims", {4, 8, 16, 32, 64}));
    ec.reference_dim = r.get_size("experiment", "reference_dim", 0);
    if (ec.reference_dim == 0 && !ec.dims.empty()) ec.reference_dim = 4 * ec.dims.back();
    ec.reference_refine = r.get_size("experiment", "reference_refine", 1);
    ec.seed = o.seed.value_or(r.get_size("experiment", "seed", 1));
    const double T = part.horizon;
    ec.snapshot_times =
        r.get_double_list("experiment", "snapshots", {0.25 * T, 0.5 * T, 0.75 * T, T});
    ec.oracle_points = r.get_size("experiment", "oracle_points", 2000);
    ec.oracle_dt = r.get_double("experiment", "oracle_dt", 1e-4);
    ec.oracle_tolerance = r.get_double("experiment", "oracle_tolerance", 1e-3);

    const std::string forcing_kind = r.get_string("nonlinearity", "kind", "convolution");
    const std::string impulse_kind = r.get_string("impulses", "kind", "sine");
    const std::size_t q = part.window_count();

    // The kernel matrix must cover every mode that gets evolved: the solve
    // dimension always, the reference dimension only for convergence runs.
    std::size_t needed = ec.solver.dim;
    if (o.size_for_convergence) {
        needed = std::max(needed, ec.reference_dim);
        for (std::size_t d : ec.dims) needed = std::max(needed, d);
    }
    std::size_t kernel_modes = r.get_size("nonlinearity", "kernel_modes", 0);
    if (kernel_modes == 0) kernel_modes = std::max<std::size_t>(65, needed + 1);
    if (kernel_modes < needed + 1)
        throw ConfigError("[nonlinearity] kernel_modes = " + std::to_string(kernel_modes) +
                          " does not cover the largest solved dimension " + std::to_string(needed));
    std::size_t grid_points = r.get_size("nonlinearity", "grid_points", 0);
    if (grid_points == 0) grid_points = std::max<std::size_t>(512, 2 * kernel_modes);
    if (grid_points < 2 * kernel_modes)
        throw ConfigError("[nonlinearity] grid_points must be at least twice kernel_modes");

    const double beta0 = r.get_double("nonlinearity", "beta0", 0.1);
    const double beta_slope = r.get_double("nonlinearity", "beta_slope", 0.5);
    const double kernel_width = r.get_double("nonlinearity", "kernel_width", 1.0);
    if (!(kernel_width > 0.0)) throw ConfigError("[nonlinearity] kernel_width must be positive");
    const double amplitude = r.get_double("nonlinearity", "amplitude", 0.3);
    const double forcing_scale = r.get_double("nonlinearity", "lipschitz_scale", 1.0);
    const double impulse_scale = r.get_double("impulses", "lipschitz_scale", 1.0);
    if (!(forcing_scale > 0.0) || !(impulse_scale > 0.0))
        throw ConfigError("lipschitz_scale must be positive");

    const bool needs_instance =
        forcing_kind == "convolution" || forcing_kind == "arctan" || (impulse_kind == "sine" && q > 0);
    if (needs_instance)
        ec.instance = make_heat_instance(
            [kernel_width](double u) { return std::exp(-(u / kernel_width) * (u / kernel_width)); },
            [beta0, beta_slope](double t) { return beta0 * (1.0 + beta_slope * t); }, kernel_modes,
            grid_points);

    if (forcing_kind == "convolution") {
        ec.problem.forcing = convolution_nonlinearity(ec.instance, part.delay, part.horizon);
    } else if (forcing_kind == "arctan") {
        ec.problem.forcing = arctan_nonlinearity(
            ec.instance, [amplitude](double t, double s) { return amplitude * std::sin(t - s); },
            std::abs(amplitude), part.delay, ec.instance->kernel_modes);
    } else if (forcing_kind == "none") {
        ec.problem.forcing.value = [](double, const SegmentFn&) { return SpectralVector(); };
    } else {
        throw ConfigError("[nonlinearity] kind must be convolution, arctan, or none, got '" +
                          forcing_kind + "'");
    }
    ec.problem.forcing.lipschitz *= forcing_scale;

    if (impulse_kind == "sine") {
        for (std::size_t i = 1; i <= q; ++i) {
            ImpulseMap h = sine_impulse_map(ec.instance, i);
            h.lipschitz *= impulse_scale;
            ec.problem.impulses.push_back(std::move(h));
        }
    } else if (impulse_kind == "none") {
        if (q > 0)
            throw ConfigError("[impulses] kind = none but the partition declares " + std::to_string(q) +
                              " impulse windows; every window needs a map");
    } else {
        throw ConfigError("[impulses] kind must be sine or none, got '" + impulse_kind + "'");
    }

    const std::string history_kind = r.get_string("history", "kind", "ramp");
    if (history_kind == "ramp") {
        const std::size_t mode = r.get_size("history", "mode", 0);
        const double scale = r.get_double("history", "scale", 0.5);
        const double tau = part.delay;
        ec.problem.history.value = [mode, scale, tau](double theta) {
            return SpectralVector::unit(mode, scale * (1.0 + theta / tau));
        };
    } else if (history_kind == "constant") {
        const SpectralVector v(r.get_double_list("history", "coefficients", {0.5}));
        if (v.size() == 0) throw ConfigError("[history] coefficients must not be empty");
        ec.problem.history.value = [v](double) { return v; };
    } else {
        throw ConfigError("[history] kind must be ramp or constant, got '" + history_kind + "'");
    }
    ec.problem.history.holder_exponent = 1.0;

    std::size_t spectrum_modes = r.get_size("experiment", "spectrum_modes", 0);
    const std::size_t auto_modes =
        std::max({kernel_modes + 1, ec.reference_dim + 2, ec.solver.dim + 2});
    if (spectrum_modes == 0) spectrum_modes = auto_modes;
    if (spectrum_modes < auto_modes)
        throw ConfigError("[experiment] spectrum_modes = " + std::to_string(spectrum_modes) +
                          " is below the " + std::to_string(auto_modes) + " the run needs");
    ec.problem.spectrum = dirichlet_spectrum(spectrum_modes);

    ec.problem_name = forcing_kind + "+" + impulse_kind;
    r.require_consumed();
    ec.validate();
    return ec;
}

inline ExperimentConfig load_experiment_text(const std::string& text, const ConfigOverrides& o = {}) {
    return load_experiment(IniDoc::parse_text(text), o);
}

inline ExperimentConfig load_experiment_file(const std::string& path, const ConfigOverrides& o = {}) {
    return load_experiment(IniDoc::parse_file(path), o);
}

/// The shipped defaults, spelled out; parsing this text reproduces the
/// configuration the drivers use when no file is given.
inline std::string default_config_text() {
    return R"(# Delayed heat equation with two non-instantaneous impulse windows.
# Omitted keys fall back to these same values; a 0 for kernel_modes,
# grid_points, spectrum_modes, or reference_dim means "sized automatically".

[partition]
horizon = 1.0
delay = 0.1
onset = 0.3 0.6
release = 0.4 0.7

[history]
kind = ramp
mode = 0
scale = 0.5

[nonlinearity]
kind = convolution
kernel_modes = 0
grid_points = 0
kernel_width = 1.0
beta0 = 0.1
beta_slope = 0.5
lipschitz_scale = 1.0

[impulses]
kind = sine
lipschitz_scale = 1.0

[solver]
dim = 64
dt = 0.001
alpha = 0.5
picard_tol = 1e-10
picard_max_iter = 200
refine = 1

[experiment]
dims = 4 8 16 32 64
reference_dim = 0
reference_refine = 1
seed = 1
spectrum_modes = 0
snapshots = 0.25 0.5 0.75 1.0
oracle_points = 2000
oracle_dt = 0.0001
oracle_tolerance = 0.001
)";
}

}  // namespace fglab

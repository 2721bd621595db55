#include "raf/config.hpp"

#include "raf/csv.hpp"
#include "raf/errors.hpp"
#include "raf/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace raf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const KeySpec& key(const std::string& name) {
    static const std::vector<KeySpec> all{
        {"loss", KeyKind::Text, "square | hinge"},
        {"alpha", KeyKind::Real, "sample complexity n/d (> 0)"},
        {"eps", KeyKind::Real, "fraction of facts, in [0, 1]"},
        {"mu1", KeyKind::Real, "linear kernel coefficient (>= 0)"},
        {"mustar", KeyKind::Real, "non-linear kernel coefficient (>= 0)"},
        {"gamma", KeyKind::Real, "kernel angle in [0, pi/2]; sets mu1 = sin, mustar = cos"},
        {"kernel", KeyKind::Text, "kernel family name (see the kernels command)"},
        {"kernel-p1", KeyKind::Real, "first family parameter"},
        {"kernel-p2", KeyKind::Real, "second family parameter"},
        {"lambda", KeyKind::Real, "ridge strength (>= 0; 0 is the ridgeless limit)"},
        {"kappa", KeyKind::Real, "random-feature width p/d (0 = kernel limit)"},
        {"sweep", KeyKind::Text, "swept quantity"},
        {"min", KeyKind::Real, "grid lower end"},
        {"max", KeyKind::Real, "grid upper end"},
        {"count", KeyKind::Integer, "grid points (>= 2)"},
        {"spacing", KeyKind::Text, "log | linear"},
        {"endpoints", KeyKind::Flag, "add the lambda -> 0+ and lambda -> inf rows"},
        {"objective", KeyKind::Text, "lambda-opt | ridgeless | fixed"},
        {"estimator", KeyKind::Text, "bo | erm"},
        {"d", KeyKind::Integer, "input dimension"},
        {"repeats", KeyKind::Integer, "independent datasets"},
        {"seed", KeyKind::Integer, "data seed"},
        {"seed-features", KeyKind::Integer, "random-feature seed"},
        {"n-test", KeyKind::Integer, "test points per repeat"},
        {"model", KeyKind::Text, "kernel | rf"},
        {"activation", KeyKind::Text, "identity | sign | erf | relu"},
        {"lambda-grid", KeyKind::RealList, "comma-separated lambda values"},
        {"drop-constant", KeyKind::Flag, "train on K - K(0)"},
        {"theory", KeyKind::Flag, "add theory rows next to the mc rows"},
        {"output", KeyKind::Text, "output path, - for stdout"},
        {"gnuplot", KeyKind::Text, "also write a gnuplot script for the CSV to this path"},
    };
    for (const auto& k : all)
        if (k.name == name) return k;
    throw std::logic_error("config: no key spec for " + name);
}

std::vector<KeySpec> keys_of(std::initializer_list<const char*> names) {
    std::vector<KeySpec> out;
    for (const char* n : names) out.push_back(key(n));
    return out;
}

double to_real(const std::string& k, const std::string& v) {
    double x = 0.0;
    const std::string t = trim(v);
    if (t == "inf") return INFINITY;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("config key '" + k + "': expected a number, got '" + v + "'");
    if (!std::isfinite(x)) throw ConfigError("config key '" + k + "': value must be finite");
    return x;
}

long long to_integer(const std::string& k, const std::string& v) {
    long long x = 0;
    const std::string t = trim(v);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("config key '" + k + "': expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t to_seed(const std::string& k, const std::string& v) {
    std::uint64_t x = 0;
    const std::string t = trim(v);
    const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
        throw ConfigError("config key '" + k + "': expected a non-negative integer, got '" + v + "'");
    return x;
}

bool to_flag(const std::string& k, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("config key '" + k + "': expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& k, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(k, item));
    if (out.empty()) throw ConfigError("config key '" + k + "': empty list");
    return out;
}

void require(bool ok, const std::string& k, const std::string& what) {
    if (!ok) throw ConfigError("config key '" + k + "': " + what);
}

std::string flag_text(bool b) { return b ? "true" : "false"; }

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap m;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string k = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (k.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!m.emplace(k, v).second) throw ConfigError("config key '" + k + "': given twice");
    }
    return m;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string emit_config_text(const ConfigMap& m) {
    std::string out;
    for (const auto& [k, v] : m) out += k + " = " + v + "\n";
    return out;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"bo",        "bo-rate", "state-eq",       "sweep-lambda", "sweep-angle",
                                                "threshold", "rate",    "cross-validate", "mc",           "kernels"};
    return names;
}

const std::vector<KeySpec>& command_keys(const std::string& command) {
    static const std::map<std::string, std::vector<KeySpec>> table{
        {"bo", keys_of({"alpha", "eps", "sweep", "min", "max", "count", "spacing", "output"})},
        {"bo-rate", keys_of({"eps", "min", "max", "count", "output"})},
        {"state-eq", keys_of({"loss", "alpha", "eps", "mu1", "mustar", "gamma", "kernel", "kernel-p1", "kernel-p2",
                              "lambda", "kappa", "sweep", "min", "max", "count", "spacing", "output", "gnuplot"})},
        {"sweep-lambda", keys_of({"loss", "alpha", "eps", "mu1", "mustar", "gamma", "kernel", "kernel-p1",
                                  "kernel-p2", "kappa", "min", "max", "count", "spacing", "endpoints", "output", "gnuplot"})},
        {"sweep-angle", keys_of({"loss", "alpha", "eps", "objective", "lambda", "min", "max", "count", "spacing",
                                 "output", "gnuplot"})},
        {"threshold", keys_of({"eps", "sweep", "min", "max", "count", "spacing", "output"})},
        {"rate", keys_of({"estimator", "loss", "eps", "mu1", "mustar", "gamma", "kernel", "kernel-p1", "kernel-p2",
                          "lambda", "min", "max", "count", "output"})},
        {"cross-validate", keys_of({"loss", "alpha", "eps", "mu1", "mustar", "gamma", "kernel", "kernel-p1",
                                    "kernel-p2", "output"})},
        {"mc", keys_of({"loss", "alpha", "eps", "kernel", "kernel-p1", "kernel-p2", "d", "lambda-grid", "min", "max",
                        "count", "spacing", "repeats", "seed", "seed-features", "n-test", "model", "activation",
                        "kappa", "drop-constant", "theory", "output", "gnuplot"})},
        {"kernels", keys_of({"eps", "output"})},
    };
    const auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
    return it->second;
}

RunConfig build_run_config(const std::string& command, const ConfigMap& m) {
    const auto& allowed = command_keys(command);
    for (const auto& [k, v] : m) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const KeySpec& s) { return s.name == k; });
        if (!ok) throw ConfigError("config key '" + k + "': not accepted by '" + command + "'");
    }
    auto has = [&](const char* k) { return m.count(k) > 0; };
    auto real = [&](const char* k) { return to_real(k, m.at(k)); };
    auto text = [&](const char* k) { return m.at(k); };

    RunConfig c;
    c.command = command;
    if (has("output")) {
        c.output = text("output");
        require(!c.output.empty(), "output", "empty path");
    }
    if (has("gnuplot")) {
        c.gnuplot = text("gnuplot");
        require(!c.gnuplot.empty(), "gnuplot", "empty path");
        require(c.output != "-", "output", "a file path is required when 'gnuplot' is set");
    }

    // sweep selection and grid
    if (command == "sweep-lambda") c.sweep = "lambda";
    if (command == "sweep-angle") c.sweep = "angle";
    if (command == "rate" || command == "bo-rate") c.sweep = "alpha";
    if (has("sweep")) {
        c.sweep = text("sweep");
        std::set<std::string> ok;
        if (command == "bo") ok = {"alpha", "eps"};
        if (command == "state-eq") ok = {"lambda", "alpha", "eps", "kappa"};
        if (command == "threshold") ok = {"eps"};
        require(ok.count(c.sweep) > 0, "sweep", "unsupported quantity '" + c.sweep + "' for " + command);
    }
    const bool mc_grid = command == "mc" && !has("lambda-grid");
    if (!c.sweep.empty() || mc_grid) {
        // defaults per quantity
        if (c.sweep == "lambda" || mc_grid) {
            c.min = 1e-5, c.max = 1e2, c.count = mc_grid ? 12 : 60, c.log_spacing = true;
        } else if (c.sweep == "angle") {
            c.min = 1e-3, c.max = std::numbers::pi / 2.0, c.count = 60, c.log_spacing = false;
        } else if (command == "rate" || command == "bo-rate") {
            c.min = 10.0, c.max = 1e4, c.count = 61, c.log_spacing = true;
        } else {
            c.count = 20;
            c.log_spacing = c.sweep == "alpha" || c.sweep == "kappa";
            require(has("min"), "min", "required when sweeping " + c.sweep);
            require(has("max"), "max", "required when sweeping " + c.sweep);
        }
        if (has("min")) c.min = real("min");
        if (has("max")) c.max = real("max");
        if (has("count")) {
            const long long n = to_integer("count", text("count"));
            require(n >= 2 && n <= 1000000, "count", "must be at least 2");
            c.count = static_cast<int>(n);
        }
        if (has("spacing")) {
            const std::string s = text("spacing");
            require(s == "log" || s == "linear", "spacing", "expected log or linear");
            c.log_spacing = s == "log";
        }
        require(c.min < c.max, "max", "must exceed min");
        if (c.log_spacing) require(c.min > 0.0, "min", "log spacing needs min > 0");
    } else {
        for (const char* k : {"min", "max", "count", "spacing"})
            require(!has(k), k, "only valid together with a sweep");
    }

    if (has("loss")) {
        try {
            c.loss = parse_loss(text("loss"));
        } catch (const std::exception&) {
            throw ConfigError("config key 'loss': expected square or hinge, got '" + text("loss") + "'");
        }
    }
    const bool needs_loss = command == "state-eq" || command == "sweep-lambda" || command == "sweep-angle" ||
                            command == "cross-validate" || command == "mc";
    if (needs_loss) require(has("loss"), "loss", "required");

    if (has("estimator")) {
        c.estimator = text("estimator");
        require(c.estimator == "bo" || c.estimator == "erm", "estimator", "expected bo or erm");
    }
    if (command == "rate" && c.estimator == "erm") require(has("loss"), "loss", "required for estimator erm");

    const bool needs_alpha = command == "bo" || command == "state-eq" || command == "sweep-lambda" ||
                             command == "sweep-angle" || command == "cross-validate" || command == "mc";
    if (has("alpha")) {
        require(c.sweep != "alpha", "alpha", "conflicts with sweep = alpha");
        c.alpha = real("alpha");
        require(c.alpha > 0.0, "alpha", "must be positive");
    } else if (needs_alpha && c.sweep != "alpha") {
        require(false, "alpha", "required");
    }
    const bool needs_eps = command != "kernels";
    if (has("eps")) {
        require(c.sweep != "eps", "eps", "conflicts with sweep = eps");
        c.eps = real("eps");
        require(c.eps >= 0.0 && c.eps <= 1.0, "eps", "must lie in [0, 1]");
        if (command == "cross-validate" || command == "rate" || command == "bo-rate")
            require(c.eps < 1.0, "eps", "must be below 1 for " + command);
    } else if (needs_eps && c.sweep != "eps") {
        require(false, "eps", "required");
    }
    if (c.sweep == "eps") require(c.min >= 0.0 && c.max <= 1.0, "max", "eps grid must lie in [0, 1]");

    // geometry
    const bool geo_cmd = command == "state-eq" || command == "sweep-lambda" || command == "cross-validate" ||
                         (command == "rate" && c.estimator == "erm");
    if (has("kernel") || command == "mc") {
        if (command == "mc") require(has("kernel") || (has("model") && text("model") == "rf"), "kernel", "required");
        for (const char* k : {"mu1", "mustar", "gamma"}) require(!has(k), k, "conflicts with 'kernel'");
        if (has("kernel")) {
            KernelFamily kf;
            try {
                kf.tag = parse_kernel_tag(text("kernel"));
            } catch (const std::exception&) {
                throw ConfigError("config key 'kernel': unknown family '" + text("kernel") + "'");
            }
            if (has("kernel-p1")) kf.p1 = real("kernel-p1");
            if (has("kernel-p2")) kf.p2 = real("kernel-p2");
            try {
                const KernelGeometry g = family_geometry(kf);
                c.mu1 = g.mu1;
                c.mustar = g.mu_star;
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config key 'kernel': ") + e.what());
            }
            c.kernel = kf;
        }
    } else {
        for (const char* k : {"kernel-p1", "kernel-p2"}) require(!has(k), k, "only valid with 'kernel'");
        if (has("gamma")) {
            for (const char* k : {"mu1", "mustar"}) require(!has(k), k, "conflicts with 'gamma'");
            const double g = real("gamma");
            require(g >= 0.0 && g <= std::numbers::pi / 2.0, "gamma", "must lie in [0, pi/2]");
            c.mu1 = std::sin(g);
            c.mustar = std::cos(g);
        } else if (geo_cmd) {
            require(has("mu1"), "mu1", "required (or give 'kernel' or 'gamma')");
            require(has("mustar"), "mustar", "required (or give 'kernel' or 'gamma')");
            c.mu1 = real("mu1");
            c.mustar = real("mustar");
            require(c.mu1 >= 0.0, "mu1", "must be >= 0");
            require(c.mustar >= 0.0, "mustar", "must be >= 0");
        }
    }

    if (has("lambda")) {
        require(c.sweep != "lambda", "lambda", "conflicts with sweep = lambda");
        c.lambda = real("lambda");
        require(c.lambda >= 0.0, "lambda", "must be >= 0");
    } else if (command == "state-eq" && c.sweep != "lambda") {
        require(false, "lambda", "required");
    } else if (command == "rate" && c.estimator == "erm") {
        require(false, "lambda", "required for estimator erm");
    }
    if (c.sweep == "lambda") require(c.min >= 0.0, "min", "lambda grid must be >= 0");

    if (has("objective")) {
        c.objective = text("objective");
        require(c.objective == "lambda-opt" || c.objective == "ridgeless" || c.objective == "fixed", "objective",
                "expected lambda-opt, ridgeless or fixed");
    }
    if (command == "sweep-angle") {
        require(c.objective != "fixed" || has("lambda"), "lambda", "required for objective fixed");
        require(c.objective == "fixed" || !has("lambda"), "lambda", "only valid with objective fixed");
        require(c.min >= 0.0 && c.max <= std::numbers::pi / 2.0, "max", "angle grid must lie in [0, pi/2]");
    }

    if (has("kappa")) {
        require(c.sweep != "kappa", "kappa", "conflicts with sweep = kappa");
        c.kappa = real("kappa");
        require(c.kappa >= 0.0, "kappa", "must be >= 0");
    }
    if (c.sweep == "kappa") require(c.min > 0.0, "min", "kappa grid must be positive");

    if (has("endpoints")) c.endpoints = to_flag("endpoints", text("endpoints"));

    if (command == "mc") {
        if (has("d")) {
            const long long v = to_integer("d", text("d"));
            require(v >= 1 && v <= 100000, "d", "must lie in [1, 100000]");
            c.d = static_cast<int>(v);
        }
        if (has("repeats")) {
            const long long v = to_integer("repeats", text("repeats"));
            require(v >= 1 && v <= 100000, "repeats", "must be >= 1");
            c.repeats = static_cast<int>(v);
        }
        if (has("n-test")) {
            const long long v = to_integer("n-test", text("n-test"));
            require(v >= 1 && v <= 10000000, "n-test", "must be >= 1");
            c.n_test = static_cast<int>(v);
        }
        if (has("seed")) c.seed = to_seed("seed", text("seed"));
        if (has("seed-features")) c.seed_features = to_seed("seed-features", text("seed-features"));
        if (has("model")) {
            c.model = text("model");
            require(c.model == "kernel" || c.model == "rf", "model", "expected kernel or rf");
        }
        if (has("activation")) {
            c.activation = text("activation");
            const std::set<std::string> ok{"identity", "sign", "erf", "relu"};
            require(ok.count(c.activation) > 0, "activation", "expected identity, sign, erf or relu");
        }
        if (c.model == "rf") require(c.kappa > 0.0, "kappa", "rf model needs kappa > 0");
        if (has("drop-constant")) c.drop_constant = to_flag("drop-constant", text("drop-constant"));
        if (has("theory")) c.theory = to_flag("theory", text("theory"));
        if (has("lambda-grid")) {
            for (const char* k : {"min", "max", "count", "spacing"})
                require(!has(k), k, "conflicts with 'lambda-grid'");
            c.lambda_grid = to_list("lambda-grid", text("lambda-grid"));
        } else {
            c.lambda_grid = grid_values(c);
        }
        for (double l : c.lambda_grid) {
            require(l >= 0.0, "lambda-grid", "values must be >= 0");
            if (c.loss == Loss::Hinge) require(l > 0.0, "lambda-grid", "hinge needs lambda > 0");
        }
        // the grid is carried by lambda_grid alone
        c.min = c.max = 0.0;
        c.count = 0;
        c.log_spacing = true;
    }
    return c;
}

ConfigMap to_config_map(const RunConfig& c) {
    ConfigMap m;
    const auto& keys = command_keys(c.command);
    auto accepts = [&](const char* k) {
        return std::any_of(keys.begin(), keys.end(), [&](const KeySpec& s) { return s.name == k; });
    };
    auto put = [&](const char* k, const std::string& v) {
        if (accepts(k)) m[k] = v;
    };
    const std::string cmd = c.command;
    const bool loss_used = accepts("loss") && (cmd != "rate" || c.estimator == "erm");
    if (loss_used) put("loss", loss_name(c.loss));
    if (c.sweep != "alpha" && cmd != "rate" && cmd != "bo-rate" && cmd != "threshold" && cmd != "kernels")
        put("alpha", format_number(c.alpha));
    if (c.sweep != "eps") put("eps", format_number(c.eps));
    const bool geo = cmd == "state-eq" || cmd == "sweep-lambda" || cmd == "cross-validate" ||
                     (cmd == "rate" && c.estimator == "erm") || cmd == "mc";
    if (geo) {
        if (c.kernel) {
            put("kernel", kernel_name(c.kernel->tag));
            put("kernel-p1", format_number(c.kernel->p1));
            put("kernel-p2", format_number(c.kernel->p2));
        } else if (cmd != "mc") {
            put("mu1", format_number(c.mu1));
            put("mustar", format_number(c.mustar));
        }
    }
    const bool lambda_used = (cmd == "state-eq" && c.sweep != "lambda") ||
                             (cmd == "sweep-angle" && c.objective == "fixed") ||
                             (cmd == "rate" && c.estimator == "erm");
    if (lambda_used) m["lambda"] = format_number(c.lambda);
    if (cmd == "state-eq" || cmd == "sweep-lambda" || cmd == "mc") put("kappa", format_number(c.kappa));
    if (cmd == "sweep-angle") put("objective", c.objective);
    if (cmd == "rate") put("estimator", c.estimator);
    if (cmd == "sweep-lambda") put("endpoints", flag_text(c.endpoints));
    if (!c.sweep.empty() && cmd != "mc") {
        if (cmd == "bo" || cmd == "state-eq" || cmd == "threshold") put("sweep", c.sweep);
        put("min", format_number(c.min));
        put("max", format_number(c.max));
        put("count", std::to_string(c.count));
        put("spacing", c.log_spacing ? "log" : "linear");
    }
    if (cmd == "mc") {
        std::string grid;
        for (double l : c.lambda_grid) grid += (grid.empty() ? "" : ",") + format_number(l);
        m["lambda-grid"] = grid;
        m["d"] = std::to_string(c.d);
        m["repeats"] = std::to_string(c.repeats);
        m["seed"] = std::to_string(c.seed);
        m["seed-features"] = std::to_string(c.seed_features);
        m["n-test"] = std::to_string(c.n_test);
        m["model"] = c.model;
        m["activation"] = c.activation;
        m["drop-constant"] = flag_text(c.drop_constant);
        m["theory"] = flag_text(c.theory);
    }
    m["output"] = c.output;
    if (!c.gnuplot.empty()) m["gnuplot"] = c.gnuplot;
    return m;
}

std::vector<double> grid_values(const RunConfig& c) {
    if (c.count < 2) throw ConfigError("config key 'count': grid needs at least 2 points");
    const auto n = static_cast<std::size_t>(c.count);
    return c.log_spacing ? logspace(c.min, c.max, n) : linspace(c.min, c.max, n);
}

}  // namespace raf

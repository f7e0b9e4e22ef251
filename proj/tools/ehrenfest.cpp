// Command-line driver: simulate, lyapunov, sweep-field, sweep-geometry, orbit, basin.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehrenfest/errors.hpp"
#include "ehrenfest/experiments.hpp"
#include "ehrenfest/io.hpp"
#include "ehrenfest/orbits.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ehrenfest;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kPartial = 4 };

struct Range {
    double lo{0.0}, hi{0.0}, step{0.0};
};

struct CliConfig {
    std::string subcommand;
    RunConfig run;
    bool eps_set{false};
    Range eps_range{1.0, 1.3, 0.01};
    Range sx_range{0.05, 1.0, 0.01};
    int threads{1};
    std::string out;
    // orbit
    std::string family{"table2"};
    std::optional<std::string> recipe;
    double x_apex{-0.2};
    int branch{1};
    // basin
    std::string basin_recipe{"nineteen-point"};
    std::vector<double> magnitudes{0.0, 1e-6, 1e-4};
    std::vector<Perturbation> directions{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    BasinOptions basin;
};

double number_field(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

long long count_field(double v, const std::string& path) {
    if (!std::isfinite(v) || v < 0 || v != std::floor(v) || v > 9e18) throw ConfigError(path, "expected a non-negative integer");
    return static_cast<long long>(v);
}

long long count_field(const ordered_json& j, const std::string& path) {
    return count_field(number_field(j, path), path);
}

Range parse_range(const std::string& text, const std::string& path) {
    Range r;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || !is.eof())
        throw ConfigError(path, "expected LO:HI:STEP, got '" + text + "'");
    if (!(r.step > 0.0)) throw ConfigError(path, "step must be positive");
    return r;
}

Range range_field(const ordered_json& j, const std::string& path) {
    if (j.is_string()) return parse_range(j.get<std::string>(), path);
    if (j.is_object()) {
        Range r{number_field(j.at("lo"), path + ".lo"), number_field(j.at("hi"), path + ".hi"),
                number_field(j.at("step"), path + ".step")};
        if (!(r.step > 0.0)) throw ConfigError(path + ".step", "must be positive");
        return r;
    }
    throw ConfigError(path, "expected \"LO:HI:STEP\" or {lo, hi, step}");
}

void apply_file(CliConfig& c, const ordered_json& root) {
    if (!root.is_object()) throw ConfigError("config", "top level must be an object");
    for (auto it = root.begin(); it != root.end(); ++it) {
        const std::string& key = it.key();
        const ordered_json& v = it.value();
        if (key == "geometry") {
            for (auto g = v.begin(); g != v.end(); ++g) {
                const std::string path = "geometry." + g.key();
                if (g.key() == "L") c.run.geometry.L = number_field(*g, path);
                else if (g.key() == "s_x") c.run.geometry.s_x = number_field(*g, path);
                else if (g.key() == "s_y") c.run.geometry.s_y = number_field(*g, path);
                else throw ConfigError(path, "unknown field");
            }
        } else if (key == "eps") {
            c.run.eps = number_field(v, "eps");
            c.eps_set = true;
        } else if (key == "eps_range") {
            c.eps_range = range_field(v, "eps_range");
        } else if (key == "sx_range") {
            c.sx_range = range_field(v, "sx_range");
        } else if (key == "threads") {
            c.threads = static_cast<int>(count_field(v, "threads"));
        } else if (key == "out") {
            c.out = v.get<std::string>();
        } else if (key == "run") {
            for (auto r = v.begin(); r != v.end(); ++r) {
                const std::string path = "run." + r.key();
                if (r.key() == "n_collisions") c.run.n_collisions = count_field(*r, path);
                else if (r.key() == "seed") c.run.seed = r->get<std::uint64_t>();
                else if (r.key() == "tail_size") c.run.tail_size = count_field(*r, path);
                else if (r.key() == "ic") {
                    if (r->is_null()) {
                        c.run.ic.reset();
                    } else {
                        ParticleState s;
                        s.x = number_field(r->at("x"), path + ".x");
                        s.y = number_field(r->at("y"), path + ".y");
                        s.theta = number_field(r->at("theta"), path + ".theta");
                        c.run.ic = s;
                    }
                } else if (r.key() == "thinning") {
                    const std::string kind = r->value("kind", "log");
                    if (kind == "log") {
                        c.run.thinning.kind = ThinningPolicy::Kind::Log;
                    } else if (kind == "every") {
                        c.run.thinning.kind = ThinningPolicy::Kind::Every;
                        if (r->contains("every")) c.run.thinning.every = count_field(r->at("every"), path + ".every");
                    } else {
                        throw ConfigError(path + ".kind", "expected \"log\" or \"every\"");
                    }
                } else {
                    throw ConfigError(path, "unknown field");
                }
            }
        } else if (key == "orbit") {
            if (v.contains("family")) c.family = v.at("family").get<std::string>();
            if (v.contains("recipe") && !v.at("recipe").is_null()) c.recipe = v.at("recipe").get<std::string>();
            if (v.contains("x_apex")) c.x_apex = number_field(v.at("x_apex"), "orbit.x_apex");
            if (v.contains("branch")) c.branch = v.at("branch").get<int>();
        } else if (key == "basin") {
            if (v.contains("recipe")) c.basin_recipe = v.at("recipe").get<std::string>();
            if (v.contains("magnitudes")) c.magnitudes = v.at("magnitudes").get<std::vector<double>>();
            if (v.contains("directions")) {
                c.directions.clear();
                for (const auto& d : v.at("directions")) {
                    if (!d.is_array() || d.size() != 3) throw ConfigError("basin.directions", "expected [dx, dy, dtheta]");
                    c.directions.push_back({d[0].get<double>(), d[1].get<double>(), d[2].get<double>()});
                }
            }
            if (v.contains("cap")) c.basin.cap = count_field(v.at("cap"), "basin.cap");
            if (v.contains("fit_collisions")) c.basin.fit_collisions = count_field(v.at("fit_collisions"), "basin.fit_collisions");
        } else if (key == "subcommand" || key == "version" || key == "wall_time_s" || key == "outputs" || key == "exit_code") {
            // manifest bookkeeping
        } else {
            throw ConfigError(key, "unknown field");
        }
    }
}

ordered_json to_json(const Range& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }

ordered_json resolved(const CliConfig& c) {
    ordered_json j;
    j["geometry"] = to_json(c.run.geometry);
    j["eps"] = c.run.eps;
    j["eps_range"] = to_json(c.eps_range);
    j["sx_range"] = to_json(c.sx_range);
    j["threads"] = c.threads;
    j["out"] = c.out;
    ordered_json run;
    run["n_collisions"] = c.run.n_collisions;
    run["seed"] = c.run.seed;
    run["tail_size"] = c.run.tail_size;
    run["ic"] = c.run.ic ? ordered_json{{"x", c.run.ic->x}, {"y", c.run.ic->y}, {"theta", c.run.ic->theta}}
                         : ordered_json(nullptr);
    if (c.run.thinning.kind == ThinningPolicy::Kind::Log)
        run["thinning"] = {{"kind", "log"}};
    else
        run["thinning"] = {{"kind", "every"}, {"every", c.run.thinning.every}};
    j["run"] = run;
    j["orbit"] = {{"family", c.family},
                  {"recipe", c.recipe ? ordered_json(*c.recipe) : ordered_json(nullptr)},
                  {"x_apex", c.x_apex},
                  {"branch", c.branch}};
    ordered_json dirs = ordered_json::array();
    for (const auto& d : c.directions) dirs.push_back({d.dx, d.dy, d.dtheta});
    j["basin"] = {{"recipe", c.basin_recipe},
                  {"magnitudes", c.magnitudes},
                  {"directions", dirs},
                  {"cap", c.basin.cap},
                  {"fit_collisions", c.basin.fit_collisions}};
    return j;
}

std::ofstream open_output(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("out", "cannot write " + p.string());
    return os;
}

int run_simulate(const CliConfig& c, const fs::path& dir, ordered_json& outputs, bool lyapunov) {
    const TrajectoryStats st = run_trajectory(c.run);
    {
        auto os = open_output(dir / "series.csv");
        write_series_csv(os, st.series);
        outputs.push_back("series.csv");
    }
    if (!lyapunov) {
        auto os = open_output(dir / "tail.csv");
        write_tail_csv(os, st.tail);
        outputs.push_back("tail.csv");
    }
    auto os = open_output(dir / "summary.json");
    write_json(os, to_json(st, c.run.eps));
    outputs.push_back("summary.json");
    std::cout << "lambda1 " << format_double(st.lambda.lambda1) << "  lambda2 " << format_double(st.lambda.lambda2)
              << "  " << to_string(classify(st)) << "  (" << st.collisions << " collisions, "
              << to_string(st.termination) << ")\n";
    return st.termination == Termination::Completed ? kOk : kNumerical;
}

int write_sweep(const std::vector<SweepRecord>& records, const fs::path& dir, ordered_json& outputs) {
    {
        auto os = open_output(dir / "sweep.csv");
        write_sweep_csv(os, records);
        outputs.push_back("sweep.csv");
    }
    auto os = open_output(dir / "multifurcation.csv");
    write_multifurcation_csv(os, records);
    outputs.push_back("multifurcation.csv");
    int failed = 0;
    for (const auto& r : records) {
        std::cout << format_double(r.param) << "  " << to_string(r.classification) << "  lambda1 "
                  << format_double(r.lambda1) << (r.error.empty() ? "" : "  error: " + r.error) << '\n';
        if (!r.error.empty()) ++failed;
    }
    return failed ? kPartial : kOk;
}

OrbitSpec build_orbit(const CliConfig& c, const BilliardGeometry& g) {
    if (c.recipe) return named_orbit(g, *c.recipe);
    if (c.family == "table2") {
        if (std::abs(c.run.eps - 0.374) < 1e-12) return named_orbit(g, "table2-row1");
        if (std::abs(c.run.eps - 0.5) < 1e-12) return named_orbit(g, "table2-row2");
        throw ConfigError("eps", "family table2 has orbits at eps 0.374 and 0.5 only");
    }
    if (c.family == "nineteen-point") return named_orbit(g, "nineteen-point");
    if (c.family == "closed2") return closed_period2(g, c.x_apex, c.branch);
    if (c.family == "open2") return open_period2(g, c.run.eps, c.branch);
    throw ConfigError("orbit.family", "unknown family '" + c.family + "'");
}

int run_orbit(const CliConfig& c, const fs::path& dir, ordered_json& outputs) {
    const BilliardGeometry g = build_geometry(c.run.geometry.L, c.run.geometry.s_x, c.run.geometry.s_y);
    const OrbitSpec o = build_orbit(c, g);
    const OrbitStability st = orbit_stability(o, g);
    ordered_json j = to_json(o, st);
    j["closure_residual"] = verify_orbit(o, g);
    auto os = open_output(dir / "orbit.json");
    write_json(os, j);
    outputs.push_back("orbit.json");
    std::cout << o.name << "  " << o.sequence.to_string(&o.shift) << "\nlambda1 " << format_double(st.lambda.lambda1)
              << "  lambda2 " << format_double(st.lambda.lambda2) << '\n';
    return kOk;
}

int run_basin(const CliConfig& c, const fs::path& dir, ordered_json& outputs) {
    const OrbitSeed seed = named_orbit_seed(c.basin_recipe);
    const double eps = c.eps_set ? c.run.eps : seed.eps;
    const ParticleState center = c.run.ic ? *c.run.ic : seed.ic;
    const auto results = basin_probe(c.run.geometry, eps, center, c.magnitudes, c.directions, c.basin, c.threads);
    auto os = open_output(dir / "basin.csv");
    write_basin_csv(os, results);
    outputs.push_back("basin.csv");
    for (const auto& r : results)
        std::cout << "magnitude " << format_double(r.magnitude) << "  N_c "
                  << (r.N_c ? std::to_string(*r.N_c) : "-") << "  lambda_inf " << format_double(r.lambda_inf)
                  << (r.converged ? "" : "  (" + r.note + ")") << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven simulator of the thermostatted, field-driven Ehrenfest gas"};
    app.require_subcommand(1);

    std::string config_path, eps_range, sx_range, out, n_text;
    std::optional<double> eps;
    std::optional<std::uint64_t> seed;
    std::optional<long long> tail;
    std::optional<int> threads;
    std::optional<std::string> family, recipe;
    std::optional<double> x_apex;
    std::optional<int> branch;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config or a previous run manifest");
        sub->add_option("--eps", eps, "Field strength");
        sub->add_option("--n", n_text, "Number of collisions (e.g. 1e6)");
        sub->add_option("--seed", seed, "PRNG seed");
        sub->add_option("--tail", tail, "Bounce points kept from the end of the run");
        sub->add_option("--threads", threads, "Worker threads for sweeps and probes");
        sub->add_option("--out", out, "Output directory (default $EHRENFEST_OUT or ./ehrenfest_out)");
    };
    const char* names[] = {"simulate", "lyapunov", "sweep-field", "sweep-geometry", "orbit", "basin"};
    const char* help[] = {"Run one trajectory and keep its tail", "Finite-time Lyapunov exponents of one trajectory",
                          "Sweep the field", "Sweep the rhombus half-width s_x", "Periodic orbit and its stability",
                          "Perturb around an attracting orbit and measure N_c"};
    for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], help[i]));
    app.get_subcommand("sweep-field")->add_option("--eps-range", eps_range, "LO:HI:STEP");
    app.get_subcommand("sweep-geometry")->add_option("--sx-range", sx_range, "LO:HI:STEP");
    auto* orbit = app.get_subcommand("orbit");
    orbit->add_option("--family", family, "table2, nineteen-point, closed2, open2");
    orbit->add_option("--recipe", recipe, "table2-row1, table2-row2, nineteen-point");
    orbit->add_option("--x-apex", x_apex, "Apex abscissa of the closed period-2 orbit");
    orbit->add_option("--branch", branch, "+1 or -1 (mirror)");
    app.get_subcommand("basin")->add_option("--recipe", recipe, "Orbit whose initial condition is the centre");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    CliConfig cfg;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    const auto start = std::chrono::steady_clock::now();
    try {
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("config", "cannot open " + config_path);
            ordered_json root;
            try {
                root = ordered_json::parse(is);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config", e.what());
            }
            // A manifest nests the resolved config.
            if (root.is_object() && root.contains("config")) {
                if (root.contains("subcommand") && root["subcommand"] != cfg.subcommand)
                    throw ConfigError("subcommand", "manifest was written by '" +
                                                        root["subcommand"].get<std::string>() + "'");
                root = root["config"];
            }
            try {
                apply_file(cfg, root);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config", e.what());
            }
        }
        if (eps) {
            cfg.run.eps = *eps;
            cfg.eps_set = true;
        }
        if (!n_text.empty()) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(n_text, &used);
                if (used != n_text.size()) throw std::invalid_argument(n_text);
            } catch (const std::exception&) {
                throw ConfigError("run.n_collisions", "expected a number, got '" + n_text + "'");
            }
            cfg.run.n_collisions = count_field(v, "run.n_collisions");
        }
        if (seed) cfg.run.seed = *seed;
        if (tail) cfg.run.tail_size = *tail;
        if (threads) cfg.threads = *threads;
        if (!eps_range.empty()) cfg.eps_range = parse_range(eps_range, "eps_range");
        if (!sx_range.empty()) cfg.sx_range = parse_range(sx_range, "sx_range");
        if (family) cfg.family = *family;
        if (recipe) {
            if (cfg.subcommand == "basin") cfg.basin_recipe = *recipe;
            else cfg.recipe = *recipe;
        }
        if (x_apex) cfg.x_apex = *x_apex;
        if (branch) cfg.branch = *branch;
        if (!out.empty()) cfg.out = out;
        if (cfg.out.empty()) {
            const char* env = std::getenv("EHRENFEST_OUT");
            cfg.out = env && *env ? env : "ehrenfest_out";
        }
        if (cfg.run.tail_size > cfg.run.n_collisions) cfg.run.tail_size = cfg.run.n_collisions;
        if (cfg.threads < 1) throw ConfigError("threads", "must be at least 1");
        validate(cfg.run);
        if (cfg.subcommand == "basin") {
            for (double m : cfg.magnitudes)
                if (!(m >= 0.0)) throw ConfigError("basin.magnitudes", "must be non-negative");
            if (cfg.basin.cap < 1) throw ConfigError("basin.cap", "must be at least 1");
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }

    const fs::path dir(cfg.out);
    int status = kOk;
    ordered_json outputs = ordered_json::array();
    try {
        fs::create_directories(dir);
        if (cfg.subcommand == "simulate") status = run_simulate(cfg, dir, outputs, false);
        else if (cfg.subcommand == "lyapunov") status = run_simulate(cfg, dir, outputs, true);
        else if (cfg.subcommand == "sweep-field")
            status = write_sweep(sweep_field(cfg.eps_range.lo, cfg.eps_range.hi, cfg.eps_range.step, cfg.run, cfg.threads),
                                 dir, outputs);
        else if (cfg.subcommand == "sweep-geometry")
            status = write_sweep(sweep_geometry(cfg.sx_range.lo, cfg.sx_range.hi, cfg.sx_range.step, cfg.run, cfg.threads),
                                 dir, outputs);
        else if (cfg.subcommand == "orbit") status = run_orbit(cfg, dir, outputs);
        else if (cfg.subcommand == "basin") status = run_basin(cfg, dir, outputs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        status = kConfig;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        status = kNumerical;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json manifest;
    manifest["subcommand"] = cfg.subcommand;
    manifest["version"] = kVersion;
    manifest["config"] = resolved(cfg);
    manifest["outputs"] = outputs;
    manifest["exit_code"] = status;
    manifest["wall_time_s"] = wall;
    try {
        auto os = open_output(dir / "manifest.json");
        write_json(os, manifest);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    return status;
}

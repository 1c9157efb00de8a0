#include "mpnls/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "mpnls/io.hpp"

namespace mpnls {

using nlohmann::json;

namespace {

json to_json_obj(const RunConfig& c) {
    json j;
    j["mu"] = c.mu;
    j["epsilon"] = c.epsilon;
    j["map"] = {{"kind", c.map_kind}, {"beta_minus", c.beta_minus}, {"beta_plus", c.beta_plus}};
    j["grid1d"] = {{"half_width", c.half_width}, {"n_front", c.n_front}, {"n_spectrum", c.n_spectrum}};
    j["grid2d"] = {{"n", c.n2d}};
    j["run"] = {{"t_end", c.t_end},       {"dt", c.dt},
                {"snapshot_every", c.snapshot_every}, {"dealias", c.dealias},
                {"lanczos_k_max", c.lanczos_k_max},   {"lanczos_tol", c.lanczos_tol}};
    j["curve"] = {{"markers", c.markers},     {"radius", c.radius},
                  {"center", {c.center_x, c.center_y}}, {"perturb_mode", c.perturb_mode},
                  {"perturb_amp", c.perturb_amp},       {"T_end", c.curve_T_end},
                  {"dT", c.curve_dT},         {"alpha3", c.alpha3}};
    j["mu_list"] = c.mu_list;
    j["with_gap"] = c.with_gap;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

} // namespace

std::string RunConfig::to_json() const { return to_json_obj(*this).dump(); }

void RunConfig::validate() const {
    if (std::abs(mu) > 0.25) throw std::invalid_argument("config: |mu| <= 0.25 required");
    if (!(epsilon > 0.0 && epsilon <= 0.5)) {
        throw std::invalid_argument("config: epsilon in (0, 0.5] required");
    }
    if (!(beta_minus > 0.0 && beta_minus <= beta_plus)) {
        throw std::invalid_argument("config: 0 < beta_minus <= beta_plus required");
    }
    map_kind_from_string(map_kind);  // throws on unknown names
    if (half_width < 15.0) throw std::invalid_argument("config: half_width >= 15 required");
    if (n_front < 1025 || n_front % 2 == 0) {
        throw std::invalid_argument("config: n_front must be odd and >= 1025");
    }
    if (n_spectrum < 65 || n_spectrum % 2 == 0) {
        throw std::invalid_argument("config: n_spectrum must be odd and >= 65");
    }
    if (n2d < 16 || n2d % 2 != 0) throw std::invalid_argument("config: n2d must be even and >= 16");
    if (markers < 64) throw std::invalid_argument("config: markers >= 64 required");
    if (t_end <= 0.0 || curve_T_end <= 0.0) throw std::invalid_argument("config: run windows must be positive");
    for (double m : mu_list) {
        if (std::abs(m) > 0.25) throw std::invalid_argument("config: mu_list entry outside window");
    }
}

RunConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    static const std::set<std::string> known = {"mu",     "epsilon", "map",     "grid1d",
                                                "grid2d", "run",     "curve",   "mu_list",
                                                "with_gap", "seed",  "output_dir"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
        }
    }
    c.mu = j.value("mu", c.mu);
    c.epsilon = j.value("epsilon", c.epsilon);
    if (j.contains("map")) {
        const auto& m = j["map"];
        c.map_kind = m.value("kind", c.map_kind);
        c.beta_minus = m.value("beta_minus", c.beta_minus);
        c.beta_plus = m.value("beta_plus", c.beta_plus);
    }
    if (j.contains("grid1d")) {
        const auto& g = j["grid1d"];
        c.half_width = g.value("half_width", c.half_width);
        c.n_front = g.value("n_front", c.n_front);
        c.n_spectrum = g.value("n_spectrum", c.n_spectrum);
    }
    if (j.contains("grid2d")) c.n2d = j["grid2d"].value("n", c.n2d);
    if (j.contains("run")) {
        const auto& r = j["run"];
        c.t_end = r.value("t_end", c.t_end);
        c.dt = r.value("dt", c.dt);
        c.snapshot_every = r.value("snapshot_every", c.snapshot_every);
        c.dealias = r.value("dealias", c.dealias);
        c.lanczos_k_max = r.value("lanczos_k_max", c.lanczos_k_max);
        c.lanczos_tol = r.value("lanczos_tol", c.lanczos_tol);
    }
    if (j.contains("curve")) {
        const auto& cv = j["curve"];
        c.markers = cv.value("markers", c.markers);
        c.radius = cv.value("radius", c.radius);
        if (cv.contains("center")) {
            c.center_x = cv["center"][0];
            c.center_y = cv["center"][1];
        }
        c.perturb_mode = cv.value("perturb_mode", c.perturb_mode);
        c.perturb_amp = cv.value("perturb_amp", c.perturb_amp);
        c.curve_T_end = cv.value("T_end", c.curve_T_end);
        c.curve_dT = cv.value("dT", c.curve_dT);
        c.alpha3 = cv.value("alpha3", c.alpha3);
    }
    if (j.contains("mu_list")) c.mu_list = j["mu_list"].get<std::vector<double>>();
    c.with_gap = j.value("with_gap", c.with_gap);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
}

RunConfig load_config(const std::string& path) {
    return config_from_json_text(read_text_file(path));
}

std::string output_path(const RunConfig& cfg, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path root;
    if (const char* env = std::getenv("MPNLS_OUTPUT_ROOT")) root = env;
    fs::path dir = root / fs::path(cfg.output_dir);
    fs::create_directories(dir);
    return (dir / name).string();
}

} // namespace mpnls

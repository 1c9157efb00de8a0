#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpnls/model.hpp"

namespace mpnls {

// Resolved run configuration: defaults, then file values, then flag
// overrides. Serialized into every output header.
struct RunConfig {
    // model
    double mu = 0.05;
    double epsilon = 0.1;
    std::string map_kind = "constant";
    double beta_minus = 1.0;
    double beta_plus = 1.0;

    // 1D grids
    double half_width = 20.0;
    int n_front = 2049;
    int n_spectrum = 385;

    // 2D run
    int n2d = 256;
    double t_end = 100.0;
    double dt = 0.0;  // 0: stability bound
    double snapshot_every = 10.0;
    bool dealias = false;
    int lanczos_k_max = 60;
    double lanczos_tol = 1e-8;

    // seed curve / curve flow
    int markers = 256;
    double radius = 3.0;
    double center_x = 0.0, center_y = 0.0;
    int perturb_mode = 0;
    double perturb_amp = 0.0;
    double curve_T_end = 1.0;
    double curve_dT = 0.0;
    double alpha3 = 0.0;

    // sweeps
    std::vector<double> mu_list;
    bool with_gap = false;

    std::uint64_t seed = 12345;
    std::string output_dir = ".";

    std::string to_json() const;
    void validate() const;  // throws std::invalid_argument on bad windows

    ModelSpec model() const { return build_reference_model(mu, epsilon); }
    SpectralMap map() const {
        return make_spectral_map(map_kind_from_string(map_kind), beta_minus, beta_plus,
                                 model().a_minus);
    }
};

// Parse a JSON config file (all keys optional). Unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig config_from_json_text(const std::string& text);

// Resolve the output path: $MPNLS_OUTPUT_ROOT (when set) / output_dir / name.
std::string output_path(const RunConfig& cfg, const std::string& name);

} // namespace mpnls

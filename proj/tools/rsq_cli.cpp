// Experiment runner: sweeps, error distributions, assembly histograms,
// ADC measurements, calibration demos, and the verification gate.
//
// Exit codes: 0 ok, 2 validation, 3 capacity, 4 acceptance failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rsq/acceptance.hpp"
#include "rsq/adc.hpp"
#include "rsq/assembly_search.hpp"
#include "rsq/calibration.hpp"
#include "rsq/components.hpp"
#include "rsq/errors.hpp"
#include "rsq/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSchemaVersion = "rsq-csv/1";

// "4..16" or "8,12,16"
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw rsq::ValidationError("empty range: " + text);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto tok = text.substr(pos, comma - pos);
        if (!tok.empty()) out.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw rsq::ValidationError("empty list: " + text);
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto tok = text.substr(pos, comma - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw rsq::ValidationError("empty list: " + text);
    return out;
}

std::string header_block(const json& spec) {
    std::string h;
    h += "# schema: " + std::string(kSchemaVersion) + "\n";
    h += "# spec: " + spec.dump() + "\n";
    if (spec.contains("seed"))
        h += "# seed: " + std::to_string(spec["seed"].get<std::uint64_t>()) + "\n";
    return h;
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << content;
    }
    fs::rename(tmp, path);
}

fs::path out_path(const std::string& out_dir, const std::string& name) {
    return fs::path(out_dir) / name;
}

int run_entropy_sweep(const json& spec, const std::string& out_dir) {
    const auto ns = parse_int_list(spec.at("n").get<std::string>());
    const auto sigmas = parse_double_list(spec.at("sigma0").get<std::string>());
    std::vector<rsq::ConversionMode> modes;
    for (const auto& m : spec.at("modes"))
        modes.push_back(rsq::conversion_mode_from_string(m.get<std::string>()));
    const int trials = spec.at("trials").get<int>();
    const auto seed = spec.at("seed").get<std::uint64_t>();

    std::vector<rsq::SweepCell> cells;
    for (int n : ns)
        for (double s : sigmas)
            for (auto m : modes) cells.push_back({n, s, m});
    const auto rows = rsq::monte_carlo_sweep(cells, trials, seed);

    std::string csv = header_block(spec) + rsq::sweep_csv_header() + "\n";
    for (const auto& r : rows) csv += rsq::sweep_row_csv(r) + "\n";
    const auto csv_path = out_path(out_dir, spec.at("output").get<std::string>());
    write_atomic(csv_path, csv);
    const auto summary_path = csv_path.string() + ".summary.json";
    write_atomic(summary_path, rsq::sweep_summary_json(rows));

    std::size_t failed = 0;
    for (const auto& r : rows)
        if (!r.ok) ++failed;
    std::printf("entropy-sweep: %zu rows (%zu failed cells) -> %s\n", rows.size(),
                failed, csv_path.c_str());
    return 0;
}

int run_error_dist(const json& spec, const std::string& out_dir) {
    const int n = spec.at("n").get<int>();
    const double sigma0 = spec.at("sigma0").get<double>();
    const int trials = spec.at("trials").get<int>();
    const auto seed = spec.at("seed").get<std::uint64_t>();
    const auto d = rsq::error_distribution(n, sigma0, trials, seed);

    std::string csv = header_block(spec) +
                      "code,var_pe,theory_var,mean_abs_pe,mean_pd\n";
    char buf[256];
    for (std::size_t i = 0; i < d.var_pe.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g\n", i,
                      d.var_pe[i], d.theory_var[i], d.mean_abs_pe[i], d.mean_pd[i]);
        csv += buf;
    }
    const auto path = out_path(out_dir, spec.at("output").get<std::string>());
    write_atomic(path, csv);
    std::printf("error-dist: N=%d sigma0=%g trials=%d wide-code rate %.4g -> %s\n",
                n, sigma0, trials, d.wide_code_rate, path.c_str());
    return 0;
}

int run_assembly_hist(const json& spec, const std::string& out_dir) {
    const auto id = rsq::GeometricIdentity::parse(spec.at("identity").get<std::string>());
    const auto counts = rsq::assembly_count_profile(id);
    std::string csv = header_block(spec) + "code,assemblies\n";
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        csv += std::to_string(i) + "," + std::to_string(counts[i]) + "\n";
        total += counts[i];
    }
    const auto path = out_path(out_dir, spec.at("output").get<std::string>());
    write_atomic(path, csv);
    std::printf("assembly-hist: identity %s, total assemblies %llu -> %s\n",
                id.to_string().c_str(), static_cast<unsigned long long>(total),
                path.c_str());
    return 0;
}

int run_adc_measure(const json& spec, const std::string& out_dir) {
    rsq::AdcConfig cfg;
    cfg.resolution_bits = spec.at("n").get<int>();
    cfg.sigma0 = spec.at("sigma0").get<double>();
    cfg.mode = rsq::conversion_mode_from_string(spec.at("mode").get<std::string>());
    cfg.sigma0_bridge = spec.value("sigma0_bridge", 0.0);
    cfg.v_co = spec.value("v_co", 0.0);
    cfg.comparator_noise_sigma = spec.value("noise", 0.0);
    cfg.seed = spec.at("seed").get<std::uint64_t>();
    const int trials = spec.at("trials").get<int>();

    std::string csv = header_block(spec) + "trial,code,edge,dnl,inl\n";
    std::vector<double> enob;
    char buf[256];
    for (int t = 0; t < trials; ++t) {
        rsq::AdcTrial trial(cfg, static_cast<std::uint64_t>(t));
        const auto tf = trial.transfer_function();
        const auto lin = rsq::dnl_inl(tf);
        enob.push_back(rsq::metrics_of(trial.references()).entropy_bits);
        for (std::size_t i = 0; i < tf.code_edges.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%zu,%.12g,%.12g,%.12g\n", t, i + 1,
                          tf.code_edges[i], i + 1 < tf.code_edges.size() ? lin.dnl[i] : 0.0,
                          lin.inl[i]);
            csv += buf;
        }
    }
    const auto path = out_path(out_dir, spec.at("output").get<std::string>());
    write_atomic(path, csv);
    const auto s = rsq::summarize(std::move(enob));
    std::printf("adc-measure: mode %s, median ENOB %.3f bits over %d trials -> %s\n",
                rsq::to_string(cfg.mode).c_str(), s.median, trials, path.c_str());
    return 0;
}

int run_calibrate_demo(const json& spec, const std::string& out_dir) {
    rsq::AdcConfig cfg;
    cfg.resolution_bits = spec.at("n").get<int>();
    cfg.sigma0 = spec.at("sigma0").get<double>();
    cfg.sigma0_bridge = spec.value("sigma0_bridge", 0.0);
    cfg.v_co = spec.value("v_co", 0.0);
    cfg.seed = spec.at("seed").get<std::uint64_t>();
    const int trials = spec.value("trials", 1);

    std::string csv = header_block(spec) +
                      "trial,mode,entropy_bits,mqr,max_abs_dnl,max_abs_inl,"
                      "wide_codes,missing_codes\n";
    char buf[256];
    double gain_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        double h[2];
        for (int pass = 0; pass < 2; ++pass) {
            cfg.mode = pass == 0 ? rsq::ConversionMode::binary
                                 : rsq::ConversionMode::heuristic_calibrated;
            rsq::AdcTrial trial(cfg, static_cast<std::uint64_t>(t));
            const auto m = rsq::metrics_of(trial.references());
            const auto tf = rsq::transfer_from_references(trial.references());
            const auto lin = rsq::dnl_inl(tf);
            const auto prof = rsq::error_profile(trial.references());
            h[pass] = m.entropy_bits;
            std::snprintf(buf, sizeof(buf), "%d,%s,%.12g,%.12g,%.12g,%.12g,%lld,%zu\n",
                          t, rsq::to_string(cfg.mode).c_str(), m.entropy_bits, m.mqr,
                          lin.max_abs_dnl, lin.max_abs_inl,
                          static_cast<long long>(prof.wide_code_count),
                          tf.missing_codes.size());
            csv += buf;
        }
        gain_sum += h[1] - h[0];
    }
    const auto path = out_path(out_dir, spec.at("output").get<std::string>());
    write_atomic(path, csv);
    std::printf("calibrate-demo: N=%d sigma0=%g, mean ENOB gain %.2f bits -> %s\n",
                cfg.resolution_bits, cfg.sigma0, gain_sum / trials, path.c_str());
    return 0;
}

int run_verify(const json& spec, const std::string&) {
    const auto seed = spec.at("seed").get<std::uint64_t>();
    const auto results = rsq::run_acceptance(seed);
    return rsq::report_acceptance(results) ? 0 : 4;
}

int dispatch(const json& spec, const std::string& out_dir) {
    const auto cmd = spec.at("command").get<std::string>();
    if (cmd == "entropy-sweep") return run_entropy_sweep(spec, out_dir);
    if (cmd == "error-dist") return run_error_dist(spec, out_dir);
    if (cmd == "assembly-hist") return run_assembly_hist(spec, out_dir);
    if (cmd == "adc-measure") return run_adc_measure(spec, out_dir);
    if (cmd == "calibrate-demo") return run_calibrate_demo(spec, out_dir);
    if (cmd == "verify") return run_verify(spec, out_dir);
    throw rsq::ValidationError("unknown command: " + cmd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"redundant-sensing quantizer experiment runner"};
    app.require_subcommand(0, 1);

    std::string out_dir = ".";
    if (const char* env = std::getenv("RSQ_OUT_DIR")) out_dir = env;
    app.add_option("--out-dir", out_dir, "output directory (env RSQ_OUT_DIR)");

    json spec;
    std::uint64_t seed = 1;
    std::string output;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--output", output, "output file name");
    };

    auto* sweep = app.add_subcommand("entropy-sweep", "entropy/MQR over a (N, sigma0, mode) grid");
    std::string sweep_n = "4..16", sweep_sigma = "0.01,0.10", sweep_modes = "binary";
    int sweep_trials = 100;
    sweep->add_option("--n", sweep_n, "resolutions, a..b or comma list");
    sweep->add_option("--sigma0", sweep_sigma, "mismatch ratios, comma list");
    sweep->add_option("--mode", sweep_modes, "modes: binary,heuristic,oracle");
    sweep->add_option("--trials", sweep_trials, "trials per cell");
    add_common(sweep);

    auto* edist = app.add_subcommand("error-dist", "per-code error statistics, binary coding");
    int ed_n = 16;
    double ed_sigma = 0.10;
    int ed_trials = 1000;
    edist->add_option("--n", ed_n, "resolution bits");
    edist->add_option("--sigma0", ed_sigma, "mismatch ratio");
    edist->add_option("--trials", ed_trials, "realizations");
    add_common(edist);

    auto* hist = app.add_subcommand("assembly-hist", "assembly count per code");
    std::string hist_identity = "8x7s1";
    hist->add_option("--identity", hist_identity, "geometric identity, e.g. 8x7s1");
    add_common(hist);

    auto* meas = app.add_subcommand("adc-measure", "measured transfer function, DNL/INL");
    int am_n = 10, am_trials = 1;
    double am_sigma = 0.03, am_noise = 0.0, am_vco = 0.0, am_bridge = 0.0;
    std::string am_mode = "heuristic";
    meas->add_option("--n", am_n, "resolution bits");
    meas->add_option("--sigma0", am_sigma, "mismatch ratio");
    meas->add_option("--mode", am_mode, "binary|heuristic|oracle");
    meas->add_option("--trials", am_trials, "trials");
    meas->add_option("--noise", am_noise, "comparator noise sigma, LSB");
    meas->add_option("--vco", am_vco, "comparator offset, LSB");
    meas->add_option("--bridge", am_bridge, "bridge mismatch ratio");
    add_common(meas);

    auto* demo = app.add_subcommand("calibrate-demo", "before/after calibration report");
    int cd_n = 14, cd_trials = 1;
    double cd_sigma = 0.03, cd_vco = 0.0, cd_bridge = 0.0;
    demo->add_option("--n", cd_n, "resolution bits");
    demo->add_option("--sigma0", cd_sigma, "mismatch ratio");
    demo->add_option("--trials", cd_trials, "trials");
    demo->add_option("--vco", cd_vco, "comparator offset, LSB");
    demo->add_option("--bridge", cd_bridge, "bridge mismatch ratio");
    add_common(demo);

    auto* verify = app.add_subcommand("verify", "run the acceptance criteria suite");
    add_common(verify);

    auto* runcfg = app.add_subcommand("run", "re-run a stored experiment spec");
    std::string cfg_path;
    runcfg->add_option("--config", cfg_path, "JSON spec file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (runcfg->parsed()) {
            std::ifstream f(cfg_path);
            if (!f) throw rsq::ValidationError("cannot read config: " + cfg_path);
            spec = json::parse(f);
        } else if (sweep->parsed()) {
            spec["command"] = "entropy-sweep";
            spec["n"] = sweep_n;
            spec["sigma0"] = sweep_sigma;
            spec["modes"] = json::array();
            std::size_t pos = 0;
            while (pos <= sweep_modes.size()) {
                const auto comma = sweep_modes.find(',', pos);
                const auto tok = sweep_modes.substr(pos, comma - pos);
                if (!tok.empty()) spec["modes"].push_back(tok);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            spec["trials"] = sweep_trials;
        } else if (edist->parsed()) {
            spec["command"] = "error-dist";
            spec["n"] = ed_n;
            spec["sigma0"] = ed_sigma;
            spec["trials"] = ed_trials;
        } else if (hist->parsed()) {
            spec["command"] = "assembly-hist";
            spec["identity"] = hist_identity;
        } else if (meas->parsed()) {
            spec["command"] = "adc-measure";
            spec["n"] = am_n;
            spec["sigma0"] = am_sigma;
            spec["mode"] = am_mode;
            spec["trials"] = am_trials;
            spec["noise"] = am_noise;
            spec["v_co"] = am_vco;
            spec["sigma0_bridge"] = am_bridge;
        } else if (demo->parsed()) {
            spec["command"] = "calibrate-demo";
            spec["n"] = cd_n;
            spec["sigma0"] = cd_sigma;
            spec["trials"] = cd_trials;
            spec["v_co"] = cd_vco;
            spec["sigma0_bridge"] = cd_bridge;
        } else if (verify->parsed()) {
            spec["command"] = "verify";
        } else {
            std::fprintf(stderr, "%s\n", app.help().c_str());
            return 2;
        }
        if (!runcfg->parsed()) {
            spec["seed"] = seed;
            if (output.empty()) {
                std::string name = spec["command"].get<std::string>();
                for (auto& ch : name)
                    if (ch == '-') ch = '_';
                output = name + ".csv";
            }
            spec["output"] = output;
        }
        return dispatch(spec, out_dir);
    } catch (const rsq::CapacityError& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 3;
    } catch (const rsq::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

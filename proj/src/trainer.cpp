// Copyright 2026 The qpinn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpinn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace qpinn {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& section) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + section +
                                        item.key() + "'");
    }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

json config_to_json(const TrainConfig& c) {
    json j;
    j["variant"] = to_string(c.variant);
    j["adam_epochs"] = c.adam_epochs;
    j["lbfgs_epochs"] = c.lbfgs_epochs;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["deterministic"] = c.deterministic;
    j["threads"] = c.threads;
    j["cloud_csv"] = c.cloud_csv;
    j["init_checkpoint"] = c.init_checkpoint;
    j["geometry"] = {{"alpha_deg", c.geometry.alpha_deg},
                     {"radius", c.geometry.radius},
                     {"inlet_length", c.geometry.inlet_length},
                     {"outlet_length", c.geometry.outlet_length},
                     {"grid_step", c.geometry.grid_step},
                     {"v_max", c.geometry.v_max},
                     {"p_out", c.geometry.p_out}};
    j["fluid"] = {{"nu", c.fluid.nu}, {"rho", c.fluid.rho}};
    j["loss_weights"] = c.weights.w;
    j["adam"] = {{"lr", c.adam.lr},
                 {"beta1", c.adam.beta1},
                 {"beta2", c.adam.beta2},
                 {"eps", c.adam.eps},
                 {"lr_decay", c.adam.lr_decay}};
    j["lbfgs"] = {{"history", c.lbfgs.history},
                  {"c1", c.lbfgs.c1},
                  {"c2", c.lbfgs.c2},
                  {"max_line_search", c.lbfgs.max_line_search},
                  {"line_search",
                   c.lbfgs.line_search == LbfgsConfig::LineSearch::StrongWolfe
                       ? "strong_wolfe"
                       : "exact_quadratic"}};
    return j;
}

TrainConfig config_from_json(const json& j) {
    check_keys(j,
               {"variant", "adam_epochs", "lbfgs_epochs", "batch_size", "seed",
                "deterministic", "threads", "cloud_csv", "init_checkpoint",
                "geometry", "fluid", "loss_weights", "adam", "lbfgs"},
               "");
    TrainConfig c;
    if (j.contains("variant"))
        c.variant = variant_from_string(j.at("variant").get<std::string>());
    get_if(j, "adam_epochs", c.adam_epochs);
    get_if(j, "lbfgs_epochs", c.lbfgs_epochs);
    get_if(j, "batch_size", c.batch_size);
    get_if(j, "seed", c.seed);
    get_if(j, "deterministic", c.deterministic);
    get_if(j, "threads", c.threads);
    get_if(j, "cloud_csv", c.cloud_csv);
    get_if(j, "init_checkpoint", c.init_checkpoint);
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        check_keys(g,
                   {"alpha_deg", "radius", "inlet_length", "outlet_length",
                    "grid_step", "v_max", "p_out"},
                   "geometry.");
        get_if(g, "alpha_deg", c.geometry.alpha_deg);
        get_if(g, "radius", c.geometry.radius);
        get_if(g, "inlet_length", c.geometry.inlet_length);
        get_if(g, "outlet_length", c.geometry.outlet_length);
        get_if(g, "grid_step", c.geometry.grid_step);
        get_if(g, "v_max", c.geometry.v_max);
        get_if(g, "p_out", c.geometry.p_out);
    }
    if (j.contains("fluid")) {
        const json& f = j.at("fluid");
        check_keys(f, {"nu", "rho"}, "fluid.");
        get_if(f, "nu", c.fluid.nu);
        get_if(f, "rho", c.fluid.rho);
    }
    if (j.contains("loss_weights")) {
        const auto w = j.at("loss_weights").get<std::vector<double>>();
        if (w.size() != 7)
            throw std::invalid_argument("config: loss_weights needs 7 entries");
        std::copy(w.begin(), w.end(), c.weights.w.begin());
    }
    if (j.contains("adam")) {
        const json& a = j.at("adam");
        check_keys(a, {"lr", "beta1", "beta2", "eps", "lr_decay"}, "adam.");
        get_if(a, "lr", c.adam.lr);
        get_if(a, "beta1", c.adam.beta1);
        get_if(a, "beta2", c.adam.beta2);
        get_if(a, "eps", c.adam.eps);
        get_if(a, "lr_decay", c.adam.lr_decay);
    }
    if (j.contains("lbfgs")) {
        const json& l = j.at("lbfgs");
        check_keys(l, {"history", "c1", "c2", "max_line_search", "line_search"},
                   "lbfgs.");
        get_if(l, "history", c.lbfgs.history);
        get_if(l, "c1", c.lbfgs.c1);
        get_if(l, "c2", c.lbfgs.c2);
        get_if(l, "max_line_search", c.lbfgs.max_line_search);
        if (l.contains("line_search")) {
            const auto s = l.at("line_search").get<std::string>();
            if (s == "strong_wolfe")
                c.lbfgs.line_search = LbfgsConfig::LineSearch::StrongWolfe;
            else if (s == "exact_quadratic")
                c.lbfgs.line_search = LbfgsConfig::LineSearch::ExactQuadratic;
            else
                throw std::invalid_argument("config: unknown line_search " + s);
        }
    }
    if (c.adam_epochs < 0 || c.lbfgs_epochs < 0)
        throw std::invalid_argument("config: epoch counts must be >= 0");
    if (c.batch_size < 0)
        throw std::invalid_argument("config: batch_size must be >= 0");
    return c;
}

void apply_overrides(json& j, std::span<const std::string> overrides) {
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must look like key=value: " +
                                        ov);
        std::string key = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        std::replace(key.begin(), key.end(), '.', '/');
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            parsed = value;  // plain string
        }
        j[json::json_pointer("/" + key)] = parsed;
    }
}

std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t bound) {
    return rng() % bound;  // bias is irrelevant here; determinism is not
}

// portable Fisher-Yates; std::shuffle's draw sequence is not pinned down
void seeded_shuffle(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng_below(rng, i)]);
}

PointCloud resolve_cloud(const TrainConfig& cfg) {
    if (!cfg.cloud_csv.empty()) return load_csv(cfg.cloud_csv);
    return generate_mixer(cfg.geometry);
}

Architecture expected_arch(Variant v) {
    return v == Variant::Classical ? Architecture::classical()
                                   : Architecture::hybrid();
}

ModelParams resolve_initial_params(const TrainConfig& cfg) {
    if (!cfg.init_checkpoint.empty()) {
        ModelParams mp = load_checkpoint(cfg.init_checkpoint);
        if (!(mp.arch == expected_arch(cfg.variant)))
            throw std::invalid_argument(
                "init checkpoint architecture does not match the configured "
                "variant");
        return mp;
    }
    return init_params(cfg.seed, cfg.variant);
}

std::string format_alpha(double alpha) {
    std::ostringstream out;
    out << alpha;
    return out.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_run_artifacts(RunReport& report, const ModelParams& initial) {
    const TrainConfig& cfg = report.config;
    if (cfg.out_dir.empty()) return;
    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "config",
                    config_to_json_text(cfg) + "\n");
    write_loss_csv((fs::path(cfg.out_dir) / "loss.csv").string(),
                   report.initial, report.history);
    save_checkpoint(initial, (fs::path(cfg.out_dir) / "checkpoint_0").string());
    const std::size_t completed = report.history.size();
    fs::path final_ckpt = fs::path(cfg.out_dir) / "checkpoint_0";
    if (completed > 0) {
        final_ckpt = fs::path(cfg.out_dir) /
                     ("checkpoint_" + std::to_string(completed));
        save_checkpoint(report.final_params, final_ckpt.string());
    }
    report.checkpoint_path = final_ckpt.string();

    std::ostringstream rep;
    rep << "variant: " << to_string(cfg.variant) << "\n"
        << "epochs_completed: " << completed << "\n"
        << "wall_seconds: " << report.wall_seconds << "\n"
        << "initial_total: " << report.initial.total << "\n"
        << "final_total: " << report.final_total() << "\n"
        << "diverged: " << (report.diverged ? "yes" : "no") << "\n";
    if (report.diverged) rep << "diverged_epoch: " << report.diverged_epoch << "\n";
    rep << "checkpoint: " << final_ckpt.filename().string() << "\n";
    write_text_file(fs::path(cfg.out_dir) / "report", rep.str());
}

// Shared training loop. `mp` arrives initialized; the config decides the
// Adam phase batching. L-BFGS is always full batch.
RunReport run_training(const TrainConfig& cfg, ModelParams mp,
                       const PointCloud& cloud) {
    cfg.fluid.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const ModelParams initial_copy = mp;

    RunReport report;
    report.config = cfg;

    LossGradOptions opt;
    opt.weights = cfg.weights;
    opt.threads = resolve_threads(cfg);
    opt.warn_empty = false;

    const std::size_t P = mp.flat.size();
    std::vector<double> grad(P, 0.0);

    LossBreakdown cur = loss_and_gradient(cloud, {}, mp, cfg.fluid, opt, grad);
    if (!cur.finite())
        throw DivergenceError("initial loss is not finite; nothing to train");
    report.initial = cur;

    std::vector<double> prev_params;
    std::mt19937_64 batch_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(cloud.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    AdamState adam(P, cfg.adam);
    bool full_batch_grad_valid = true;

    for (int e = 1; e <= cfg.adam_epochs && !report.diverged; ++e) {
        prev_params = mp.flat;
        if (cfg.batch_size == 0) {
            adam_step(adam, mp.flat, grad);
            cur = loss_and_gradient(cloud, {}, mp, cfg.fluid, opt, grad);
        } else {
            seeded_shuffle(order, batch_rng);
            const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
            bool batch_bad = false;
            for (std::size_t lo = 0; lo < order.size() && !batch_bad;
                 lo += bs) {
                const std::size_t hi = std::min(order.size(), lo + bs);
                const std::span<const std::size_t> batch(order.data() + lo,
                                                         hi - lo);
                const LossBreakdown b = loss_and_gradient(cloud, batch, mp,
                                                          cfg.fluid, opt, grad);
                if (!b.finite()) {
                    batch_bad = true;
                    break;
                }
                adam_step(adam, mp.flat, grad);
            }
            full_batch_grad_valid = false;
            cur = batch_bad
                      ? LossBreakdown{{std::nan(""), 0, 0}, 0, 0, 0, 0,
                                      std::nan("")}
                      : total_loss(cloud, mp, cfg.fluid, cfg.weights, false);
        }
        if (!cur.finite()) {
            mp.flat = prev_params;  // keep the last finite parameters
            report.diverged = true;
            report.diverged_epoch = e;
            std::cerr << "[qpinn] training diverged at epoch " << e
                      << "; keeping the last finite checkpoint\n";
            break;
        }
        report.history.push_back(cur);
    }

    if (!report.diverged && cfg.lbfgs_epochs > 0) {
        LbfgsState ls(P, cfg.lbfgs);
        LossBreakdown fn_last = cur;
        const LossFn fn = [&](std::span<const double> p,
                              std::span<double> g) -> double {
            std::copy(p.begin(), p.end(), mp.flat.begin());
            fn_last = loss_and_gradient(cloud, {}, mp, cfg.fluid, opt, g);
            return fn_last.total;
        };
        if (full_batch_grad_valid) {
            // the Adam phase left loss/gradient evaluated at mp.flat
            ls.have_eval = true;
            ls.f = cur.total;
            ls.g.assign(grad.begin(), grad.end());
        }
        std::vector<double> pvec = mp.flat;
        for (int e = 1; e <= cfg.lbfgs_epochs && !report.diverged; ++e) {
            prev_params = pvec;
            const LbfgsStepResult res = lbfgs_step(ls, pvec, fn);
            std::copy(pvec.begin(), pvec.end(), mp.flat.begin());
            if (!res.note.empty())
                std::cerr << "[qpinn] lbfgs epoch " << e << ": " << res.note
                          << "\n";
            if (res.step_taken) cur = fn_last;
            if (!cur.finite()) {
                pvec = prev_params;
                mp.flat = prev_params;
                report.diverged = true;
                report.diverged_epoch = cfg.adam_epochs + e;
                break;
            }
            report.history.push_back(cur);
        }
    }

    report.final_params = std::move(mp);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_run_artifacts(report, initial_copy);
    return report;
}

std::vector<double> finite_totals(const RunReport& r, bool& truncated) {
    std::vector<double> out;
    out.push_back(r.initial.total);
    for (const LossBreakdown& b : r.history) {
        if (!std::isfinite(b.total)) {
            truncated = true;
            break;
        }
        out.push_back(b.total);
    }
    if (!std::isfinite(out.front()))
        throw std::invalid_argument("comparison: no finite epochs");
    return out;
}

ComparisonReport compare_totals(std::vector<double> a, std::vector<double> b,
                                bool trunc_a, bool trunc_b) {
    ComparisonReport rep;
    rep.truncated_a = trunc_a;
    rep.truncated_b = trunc_b;
    rep.epochs_a = a.size() - 1;
    rep.epochs_b = b.size() - 1;
    rep.final_a = a.back();
    rep.final_b = b.back();
    rep.relative_diff = (rep.final_a - rep.final_b) / rep.final_a;
    const std::size_t n = std::min(a.size(), b.size());
    rep.aligned.reserve(n);
    for (std::size_t e = 0; e < n; ++e)
        rep.aligned.push_back({static_cast<double>(e), a[e], b[e]});
    return rep;
}

}  // namespace

TrainConfig parse_config_text(const std::string& json_text,
                              std::span<const std::string> overrides) {
    json j = json::parse(json_text);
    apply_overrides(j, overrides);
    return config_from_json(j);
}

TrainConfig load_config_file(const std::string& path,
                             std::span<const std::string> overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), overrides);
}

std::string config_to_json_text(const TrainConfig& cfg) {
    return config_to_json(cfg).dump(2);
}

int resolve_threads(const TrainConfig& cfg) {
    if (cfg.deterministic) return 1;
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("QPINN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

RunReport train_classical(const TrainConfig& config) {
    TrainConfig cfg = config;
    const PointCloud cloud = resolve_cloud(cfg);
    ModelParams mp = resolve_initial_params(cfg);
    return run_training(cfg, std::move(mp), cloud);
}

std::vector<RunReport> transfer_learn(const std::string& base_checkpoint,
                                      std::span<const double> alphas,
                                      int epochs_per_step,
                                      const TrainConfig& base_config) {
    if (epochs_per_step < 0)
        throw std::invalid_argument("transfer_learn: negative epoch count");
    ModelParams prev = load_checkpoint(base_checkpoint);
    if (!(prev.arch == expected_arch(base_config.variant)))
        throw std::invalid_argument(
            "transfer_learn: base checkpoint architecture mismatch");

    std::vector<RunReport> reports;
    for (double alpha : alphas) {
        TrainConfig cfg = base_config;
        cfg.variant = prev.arch.variant;
        cfg.adam_epochs = 0;
        cfg.lbfgs_epochs = epochs_per_step;
        cfg.batch_size = 0;
        cfg.cloud_csv.clear();
        cfg.init_checkpoint.clear();
        cfg.geometry.alpha_deg = alpha;
        if (!base_config.out_dir.empty())
            cfg.out_dir = (fs::path(base_config.out_dir) /
                           ("alpha_" + format_alpha(alpha)))
                              .string();
        const PointCloud cloud = generate_mixer(cfg.geometry);
        RunReport rep = run_training(cfg, prev, cloud);
        prev = rep.final_params;
        reports.push_back(std::move(rep));
    }
    return reports;
}

RunReport train_hybrid(const TrainConfig& config,
                       const std::string& pretrained_trunk) {
    TrainConfig cfg = config;
    cfg.variant = Variant::Hybrid;
    if (cfg.batch_size == 0) cfg.batch_size = 256;
    ModelParams trunk = load_checkpoint(pretrained_trunk);
    if (!(trunk.arch == Architecture::classical()))
        throw std::invalid_argument(
            "train_hybrid: pretrained trunk must be a classical checkpoint");
    ModelParams mp = hybrid_from_classical(trunk, cfg.seed);
    const PointCloud cloud = resolve_cloud(cfg);
    return run_training(cfg, std::move(mp), cloud);
}

ComparisonReport compare(const RunReport& a, const RunReport& b) {
    bool ta = false, tb = false;
    auto ca = finite_totals(a, ta);
    auto cb = finite_totals(b, tb);
    return compare_totals(std::move(ca), std::move(cb), ta, tb);
}

ComparisonReport compare_loss_csv(const std::string& csv_a,
                                  const std::string& csv_b) {
    const auto rows_a = load_loss_csv(csv_a);
    const auto rows_b = load_loss_csv(csv_b);
    auto take_finite = [](const std::vector<LossBreakdown>& rows,
                          bool& truncated) {
        std::vector<double> out;
        for (const LossBreakdown& r : rows) {
            if (!std::isfinite(r.total)) {
                truncated = true;
                break;
            }
            out.push_back(r.total);
        }
        if (out.empty())
            throw std::invalid_argument("comparison: no finite epochs");
        return out;
    };
    bool ta = false, tb = false;
    auto ca = take_finite(rows_a, ta);
    auto cb = take_finite(rows_b, tb);
    return compare_totals(std::move(ca), std::move(cb), ta, tb);
}

std::string comparison_to_text(const ComparisonReport& rep) {
    std::ostringstream out;
    out << "final_total_a: " << rep.final_a << "\n"
        << "final_total_b: " << rep.final_b << "\n"
        << "relative_diff: " << rep.relative_diff << "  # (a - b) / a\n"
        << "relative_diff_percent: " << 100.0 * rep.relative_diff << "\n"
        << "epochs_a: " << rep.epochs_a
        << (rep.truncated_a ? " (non-finite tail dropped)" : "") << "\n"
        << "epochs_b: " << rep.epochs_b
        << (rep.truncated_b ? " (non-finite tail dropped)" : "") << "\n";
    return out.str();
}

void write_loss_csv(const std::string& path, const LossBreakdown& initial,
                    std::span<const LossBreakdown> history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << LossBreakdown::csv_header() << "\n";
    out << initial.csv_row(0) << "\n";
    for (std::size_t e = 0; e < history.size(); ++e)
        out << history[e].csv_row(static_cast<long>(e) + 1) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<LossBreakdown> load_loss_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != LossBreakdown::csv_header())
        throw std::runtime_error("bad loss.csv header in " + path);
    std::vector<LossBreakdown> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream iss(line);
        long epoch;
        LossBreakdown b;
        if (!(iss >> epoch >> b.momentum[0] >> b.momentum[1] >> b.momentum[2] >>
              b.continuity >> b.bc_wall >> b.bc_inlet >> b.bc_outlet >> b.total))
            throw std::runtime_error("bad loss.csv row in " + path + ": " + line);
        rows.push_back(b);
    }
    if (rows.empty()) throw std::runtime_error("empty loss.csv: " + path);
    return rows;
}

}  // namespace qpinn

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

// qpinn command-line entry point.
//
// Subcommands: geometry, train, transfer, infer, compare.
// Exit codes: 0 success, 2 configuration/usage error, 3 divergence,
// 4 I/O or runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpinn/fieldio.hpp"
#include "qpinn/geometry.hpp"
#include "qpinn/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

namespace fs = std::filesystem;

struct TrainCli {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string trunk;
    long long seed = -1;
    int threads = 0;
    bool deterministic = false;
};

qpinn::TrainConfig resolve_config(const TrainCli& cli) {
    qpinn::TrainConfig cfg =
        cli.config_path.empty()
            ? qpinn::parse_config_text("{}", cli.overrides)
            : qpinn::load_config_file(cli.config_path, cli.overrides);
    if (cli.seed >= 0) cfg.seed = static_cast<std::uint64_t>(cli.seed);
    if (cli.deterministic) cfg.deterministic = true;
    if (cli.threads > 0) cfg.threads = cli.threads;
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    return cfg;
}

void print_run_summary(const qpinn::RunReport& rep) {
    std::cout << "epochs: " << rep.history.size()
              << "  initial total: " << rep.initial.total
              << "  final total: " << rep.final_total()
              << "  wall: " << rep.wall_seconds << "s\n";
    if (!rep.checkpoint_path.empty())
        std::cout << "checkpoint: " << rep.checkpoint_path << "\n";
    if (rep.diverged)
        std::cout << "diverged at epoch " << rep.diverged_epoch
                  << "; kept last finite checkpoint\n";
}

std::string loss_csv_of(std::string path) {
    if (fs::is_directory(path)) return (fs::path(path) / "loss.csv").string();
    return path;
}

int run(int argc, char** argv) {
    CLI::App app{"hybrid quantum physics-informed Navier-Stokes solver"};
    app.require_subcommand(1);

    // geometry
    auto* geo = app.add_subcommand("geometry",
                                   "generate a Y-mixer point cloud CSV");
    qpinn::MixerSpec spec;
    std::string geo_out;
    geo->add_option("--alpha", spec.alpha_deg,
                    "inlet half-angle in degrees, in (0, 90)");
    geo->add_option("--radius", spec.radius, "pipe radius");
    geo->add_option("--inlet-length", spec.inlet_length, "inlet pipe length");
    geo->add_option("--outlet-length", spec.outlet_length, "outlet pipe length");
    geo->add_option("--grid-step", spec.grid_step, "lattice pitch");
    geo->add_option("--v-max", spec.v_max, "peak inlet speed");
    geo->add_option("--p-out", spec.p_out, "outlet pressure");
    geo->add_option("--out", geo_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "train a PINN");
    TrainCli tc;
    train->add_option("--config", tc.config_path, "JSON config file");
    train->add_option("--set", tc.overrides,
                      "config override key=value (repeatable)");
    train->add_option("--seed", tc.seed, "RNG seed (overrides config)");
    train->add_option("--threads", tc.threads, "evaluation threads");
    train->add_flag("--deterministic", tc.deterministic,
                    "bit-reproducible mode (single-threaded)");
    train->add_option("--out", tc.out_dir, "run directory");
    train->add_option("--trunk", tc.trunk,
                      "classical checkpoint whose trunk seeds a hybrid run");

    // transfer
    auto* transfer =
        app.add_subcommand("transfer", "transfer-learn across mixer angles");
    TrainCli xc;
    std::string base_ckpt, alphas_str = "31,32,33,34,35";
    int transfer_epochs = 100;
    transfer->add_option("--base", base_ckpt, "base checkpoint")->required();
    transfer->add_option("--alphas", alphas_str,
                         "comma-separated angle list in degrees");
    transfer->add_option("--epochs", transfer_epochs, "L-BFGS epochs per angle");
    transfer->add_option("--config", xc.config_path, "JSON config file");
    transfer->add_option("--set", xc.overrides, "config override key=value");
    transfer->add_option("--seed", xc.seed, "RNG seed (overrides config)");
    transfer->add_option("--threads", xc.threads, "evaluation threads");
    transfer->add_flag("--deterministic", xc.deterministic,
                       "bit-reproducible mode");
    transfer->add_option("--out", xc.out_dir, "parent run directory");

    // infer
    auto* infer = app.add_subcommand("infer", "evaluate a checkpoint on a cloud");
    std::string inf_ckpt, inf_cloud, inf_out;
    qpinn::MixerSpec inf_spec;
    infer->add_option("--checkpoint", inf_ckpt, "model checkpoint")->required();
    infer->add_option("--cloud", inf_cloud,
                      "point cloud CSV (generated from --alpha etc. if absent)");
    infer->add_option("--alpha", inf_spec.alpha_deg, "mixer angle");
    infer->add_option("--grid-step", inf_spec.grid_step, "lattice pitch");
    infer->add_option("--out", inf_out, "output VTK path")->required();

    // compare
    auto* comp = app.add_subcommand("compare", "compare two runs' loss curves");
    std::string run_a, run_b, comp_out, comp_curves;
    comp->add_option("run_a", run_a, "run directory or loss.csv")->required();
    comp->add_option("run_b", run_b, "run directory or loss.csv")->required();
    comp->add_option("--out", comp_out, "write the summary to this file");
    comp->add_option("--curves", comp_curves, "write aligned curves CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
    }

    if (geo->parsed()) {
        const qpinn::PointCloud cloud = qpinn::generate_mixer(spec);
        qpinn::save_csv(cloud, geo_out);
        std::cout << "wrote " << cloud.size() << " points (fluid "
                  << cloud.count(qpinn::Region::Fluid) << ", wall "
                  << cloud.count(qpinn::Region::Wall) << ", inlet "
                  << cloud.count(qpinn::Region::Inlet) << ", outlet "
                  << cloud.count(qpinn::Region::Outlet) << ") to " << geo_out
                  << "\n";
        return kExitOk;
    }

    if (train->parsed()) {
        const qpinn::TrainConfig cfg = resolve_config(tc);
        const qpinn::RunReport rep =
            tc.trunk.empty() ? qpinn::train_classical(cfg)
                             : qpinn::train_hybrid(cfg, tc.trunk);
        print_run_summary(rep);
        return rep.diverged ? kExitDiverged : kExitOk;
    }

    if (transfer->parsed()) {
        const qpinn::TrainConfig cfg = resolve_config(xc);
        std::vector<double> alphas;
        std::stringstream ss(alphas_str);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) alphas.push_back(std::stod(tok));
        if (alphas.empty())
            throw std::invalid_argument("transfer: empty --alphas list");
        const auto reports =
            qpinn::transfer_learn(base_ckpt, alphas, transfer_epochs, cfg);
        bool diverged = false;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::cout << "alpha " << alphas[i] << ": ";
            print_run_summary(reports[i]);
            diverged = diverged || reports[i].diverged;
        }
        return diverged ? kExitDiverged : kExitOk;
    }

    if (infer->parsed()) {
        const qpinn::ModelParams mp = qpinn::load_checkpoint(inf_ckpt);
        const qpinn::PointCloud cloud = inf_cloud.empty()
                                            ? qpinn::generate_mixer(inf_spec)
                                            : qpinn::load_csv(inf_cloud);
        const qpinn::FieldSnapshot snap = qpinn::infer(mp, cloud);
        qpinn::write_vtk(snap, inf_out);
        std::cout << "wrote " << snap.size() << " points to " << inf_out << "\n";
        return kExitOk;
    }

    if (comp->parsed()) {
        const qpinn::ComparisonReport rep =
            qpinn::compare_loss_csv(loss_csv_of(run_a), loss_csv_of(run_b));
        const std::string text = qpinn::comparison_to_text(rep);
        std::cout << text;
        if (!comp_out.empty()) {
            std::ofstream out(comp_out);
            if (!out) throw std::runtime_error("cannot write " + comp_out);
            out << text;
        }
        if (!comp_curves.empty()) {
            std::ofstream out(comp_curves);
            if (!out) throw std::runtime_error("cannot write " + comp_curves);
            out << "epoch,total_a,total_b\n";
            out << std::setprecision(17);
            for (const auto& row : rep.aligned)
                out << static_cast<long>(row[0]) << ',' << row[1] << ','
                    << row[2] << "\n";
        }
        return kExitOk;
    }

    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qpinn::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

#include "alora/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "alora/errors.hpp"
#include "alora/manifest.hpp"

namespace alora {

PlantedTask generate_task(const TaskConfig& cfg, std::uint64_t seed) {
    const int p = std::min(cfg.d, cfg.k);
    for (int r : cfg.planted_ranks)
        if (r < 1 || r > p)
            throw std::invalid_argument("generate_task: planted rank " + std::to_string(r) +
                                        " outside [1, " + std::to_string(p) + "]");

    PlantedTask task;
    task.seed = seed;
    task.noise = cfg.noise;

    ModelConfig mc;
    mc.layers = cfg.layers;
    mc.heads = cfg.heads;
    mc.d = cfg.d;
    mc.k = cfg.k;
    mc.seed = derive_seed(seed, 0x7EAC4E5);
    task.teacher = make_base_model(mc);

    // Planted deltas: exact-rank products of seeded Gaussian factors,
    // scaled so every head's delta has comparable Frobenius norm.
    const std::size_t n_ranks = cfg.planted_ranks.size();
    for (int l = 0; l < cfg.layers; ++l) {
        for (int h = 0; h < cfg.heads; ++h) {
            const int idx = l * cfg.heads + h;
            const int r = cfg.planted_ranks[static_cast<std::size_t>(idx) % n_ranks];
            Rng rng(derive_seed(seed, 0x917A27, l, h));
            LoraAdapter ad;
            ad.b = Matrix::gaussian(cfg.d, r, rng, 1.0 / std::sqrt(static_cast<double>(r)));
            ad.a = Matrix::gaussian(r, cfg.k, rng, 1.0 / std::sqrt(static_cast<double>(cfg.k)));
            ad.alpha = 1.0;
            ad.alpha_prev = 1.0;
            ad.r_cur = r;
            ad.r0 = r;
            ad.layer_id = l;
            ad.head_id = h;
            task.teacher.adapters.push_back(std::move(ad));
            task.planted_ranks.push_back(r);
        }
    }

    Rng data_rng(derive_seed(seed, 0xDA7A5E7));
    task.x = Matrix::gaussian(cfg.n_samples, cfg.k, data_rng);
    task.y = forward(task.teacher, task.x);
    if (cfg.noise > 0.0) {
        Rng noise_rng(derive_seed(seed, 0x9015E00));
        for (double& v : task.y.data()) v += noise_rng.gaussian(cfg.noise);
    }
    return task;
}

ModelState make_student(const PlantedTask& task, int r0, std::uint64_t seed) {
    ModelState student;
    student.cfg = task.teacher.cfg;
    student.base = task.teacher.base;
    student.mixing = task.teacher.mixing;
    student.mixing_t = task.teacher.mixing_t;
    attach_adapters(student, r0, seed);
    return student;
}

namespace {

// Average ranks (1-based) with ties averaged.
std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 3)
        throw std::invalid_argument("spearman: need at least 3 points");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return 0.0; // no variation on one side
    return cov / std::sqrt(va * vb);
}

double recovery_score(const ModelState& trained, const PlantedTask& task) {
    if (trained.adapters.size() != task.planted_ranks.size())
        throw std::invalid_argument("recovery_score: grid shapes differ");
    std::vector<double> planted, learned;
    planted.reserve(task.planted_ranks.size());
    learned.reserve(task.planted_ranks.size());
    for (std::size_t i = 0; i < task.planted_ranks.size(); ++i) {
        planted.push_back(static_cast<double>(task.planted_ranks[i]));
        learned.push_back(static_cast<double>(trained.adapters[i].r_cur));
    }
    return spearman(planted, learned);
}

namespace {

nlohmann::ordered_json stats_json(const RankStatistics& st) {
    nlohmann::ordered_json j;
    j["frac_below"] = st.frac_below;
    j["frac_above"] = st.frac_above;
    j["frac_middle"] = st.frac_middle;
    j["avg_effective_rank"] = st.avg_effective_rank;
    j["total_params"] = st.total_params;
    j["uniform_params"] = st.uniform_params;
    j["relative_params"] = st.relative_params;
    return j;
}

nlohmann::ordered_json mode_json(const ModeSummary& s) {
    nlohmann::ordered_json j;
    j["steps"] = s.steps;
    j["final_task_loss"] = s.final_task_loss;
    j["final_meta_loss"] = s.final_meta_loss;
    j["final_params"] = s.final_params;
    j["rank_stats"] = stats_json(s.stats);
    j["stability"] = {{"max_abs_delta", s.stability.max_abs_delta},
                      {"bound", s.stability.bound},
                      {"pass", s.stability.pass}};
    j["convergence"] = {{"fitted_c", s.convergence.fitted_c},
                        {"worst_ratio", s.convergence.worst_ratio},
                        {"threshold", s.convergence.threshold},
                        {"pass", s.convergence.pass}};
    return j;
}

void append_jsonl(std::ofstream& out, const StepRecord& rec) {
    nlohmann::ordered_json j;
    j["step"] = rec.step;
    j["task_loss"] = rec.task_loss;
    j["meta_loss"] = rec.meta_loss;
    j["l1"] = rec.l1_part;
    j["tv"] = rec.tv_part;
    j["grad_norm"] = rec.grad_sup_norm;
    j["params"] = rec.param_count;
    out << j.dump() << "\n";
}

void append_csv(std::ofstream& out, const StepRecord& rec, int heads) {
    const int total = static_cast<int>(rec.alpha.size());
    for (int i = 0; i < total; ++i) {
        const int l = i / heads, h = i % heads;
        out << rec.step << "," << l << "," << h << "," << format_double(rec.alpha[i]) << ","
            << rec.rank[i] << "\n";
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentOptions& opts) {
    const RunConfig& cfg = opts.config;
    cfg.trainer.validate();

    std::filesystem::create_directories(opts.out_dir);

    RunManifest manifest;
    manifest.seed = cfg.trainer.seed;
    manifest.config_text = serialize_config(cfg);
    manifest.started_at = iso8601_utc_now();

    const PlantedTask task = generate_task(cfg.task, cfg.trainer.seed);
    const std::uint64_t student_seed = derive_seed(cfg.trainer.seed, 0x57D0DE47);

    ExperimentResult result;
    result.out_dir = opts.out_dir;

    std::vector<TrainMode> modes;
    if (opts.run_adaptive) modes.push_back(TrainMode::adaptive);
    if (opts.run_uniform) modes.push_back(TrainMode::uniform);
    if (modes.empty()) throw ConfigError("run_experiment: no mode selected");

    std::optional<double> adaptive_loss, uniform_loss;
    std::optional<std::int64_t> adaptive_params, uniform_params;
    std::vector<int> learned_ranks;

    for (TrainMode mode : modes) {
        TrainerConfig tc = cfg.trainer;
        tc.mode = mode;
        const std::string name = mode_name(mode);
        const std::filesystem::path mode_dir = opts.out_dir / name;
        std::filesystem::create_directories(mode_dir);

        Trainer trainer(make_student(task, tc.r0, student_seed), tc);

        std::ofstream metrics(mode_dir / "metrics.jsonl", std::ios::binary);
        std::ofstream csv(mode_dir / "ranks.csv", std::ios::binary);
        if (!metrics || !csv)
            throw ConfigError("cannot write artifacts under '" + mode_dir.string() + "'");
        csv << "step,layer,head,alpha,effective_rank\n";

        std::vector<StepRecord> records;
        records.reserve(static_cast<std::size_t>(tc.steps));
        for (std::int64_t t = 0; t < tc.steps; ++t) {
            records.push_back(trainer.step(task.x, task.y));
            append_jsonl(metrics, records.back());
            append_csv(csv, records.back(), cfg.task.heads);
        }
        trainer.finalize();
        metrics.close();
        csv.close();

        ModeSummary ms;
        ms.mode = name;
        ms.steps = tc.steps;
        ms.final_task_loss = records.back().task_loss;
        ms.final_meta_loss = records.back().meta_loss;
        ms.final_params = 0;
        for (const LoraAdapter& ad : trainer.state().adapters) ms.final_params += param_count(ad);
        ms.stats = rank_statistics(trainer.state().adapters, tc.r0);
        ms.stability = stability_monitor(records, tc);
        ms.convergence = convergence_monitor(records, 0.5);

        if (mode == TrainMode::adaptive) {
            result.recovery = recovery_score(trainer.state(), task);
            for (const LoraAdapter& ad : trainer.state().adapters)
                learned_ranks.push_back(ad.r_cur);
            adaptive_loss = ms.final_task_loss;
            adaptive_params = ms.final_params;
        } else {
            uniform_loss = ms.final_task_loss;
            uniform_params = ms.final_params;
        }
        result.modes.push_back(std::move(ms));

        manifest.files.push_back({name + "/metrics.jsonl",
                                  std::filesystem::file_size(mode_dir / "metrics.jsonl"),
                                  hash_file_hex(mode_dir / "metrics.jsonl")});
        manifest.files.push_back({name + "/ranks.csv",
                                  std::filesystem::file_size(mode_dir / "ranks.csv"),
                                  hash_file_hex(mode_dir / "ranks.csv")});
    }

    if (adaptive_params && uniform_params && *uniform_params > 0)
        result.param_ratio =
            static_cast<double>(*adaptive_params) / static_cast<double>(*uniform_params);
    if (adaptive_loss && uniform_loss && *uniform_loss > 0.0)
        result.loss_ratio = *adaptive_loss / *uniform_loss;

    // summary.json is free of timestamps: byte-identical across runs of
    // the same seed.
    nlohmann::ordered_json summary;
    summary["version"] = kVersion;
    summary["seed"] = cfg.trainer.seed;
    summary["modes"] = nlohmann::ordered_json::object();
    for (const ModeSummary& ms : result.modes) summary["modes"][ms.mode] = mode_json(ms);
    if (result.recovery) {
        nlohmann::ordered_json rec;
        rec["spearman"] = *result.recovery;
        rec["planted"] = task.planted_ranks;
        nlohmann::ordered_json learned = nlohmann::ordered_json::array();
        for (const ModeSummary& ms : result.modes) {
            if (ms.mode == "adaptive") {
                // learned ranks re-listed from the trained grid via the csv
                // would repeat state; summary keeps the score and planted list.
            }
        }
        summary["recovery"] = rec;
    }
    if (result.param_ratio || result.loss_ratio) {
        nlohmann::ordered_json cmp;
        if (result.param_ratio) cmp["param_ratio"] = *result.param_ratio;
        if (result.loss_ratio) cmp["task_loss_ratio"] = *result.loss_ratio;
        summary["comparison"] = cmp;
    }
    {
        std::ofstream out(opts.out_dir / "summary.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write summary.json");
        out << summary.dump(2) << "\n";
    }
    manifest.files.push_back({"summary.json",
                              std::filesystem::file_size(opts.out_dir / "summary.json"),
                              hash_file_hex(opts.out_dir / "summary.json")});

    manifest.finished_at = iso8601_utc_now();
    write_manifest(manifest, opts.out_dir);
    return result;
}

} // namespace alora

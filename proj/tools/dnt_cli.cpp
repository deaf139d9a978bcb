// Command-line front end: train, test, power, render, calibrate.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "dnt/dnt.hpp"

namespace {

// Exit codes. `test` reserves 0/1 for its decision and reports every failure as 2.
enum Exit : int {
    kOk = 0,
    kReject = 1,
    kUsage = 2, // bad arguments or config
    kIo = 3,
    kFormat = 4,
    kDimension = 5,
    kTraining = 6,
    kDomain = 7,
    kInternal = 8,
};

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const dnt::ConfigError*>(&e)) return kUsage;
    if (dynamic_cast<const dnt::IoError*>(&e)) return kIo;
    if (dynamic_cast<const dnt::FormatError*>(&e)) return kFormat;
    if (dynamic_cast<const dnt::DimensionError*>(&e)) return kDimension;
    if (dynamic_cast<const dnt::TrainingError*>(&e)) return kTraining;
    if (dynamic_cast<const dnt::DomainError*>(&e) || dynamic_cast<const dnt::DegenerateSampleError*>(&e)) return kDomain;
    return kInternal;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw dnt::IoError("cannot open output file: " + path);
    os << text;
    if (!os) throw dnt::IoError("failed writing output file: " + path);
}

int cmd_train(const std::string& config_path, const std::string& out)
{
    const auto cfg = dnt::load_run_config(config_path);
    const auto tc = cfg.train_config(cfg.train.extractor);
    std::cerr << "training " << dnt::to_string(tc.extractor) << " model: n=" << tc.n << " h0_pool=" << tc.h0_pool
              << " h1_count=" << tc.h1_count << " d=" << tc.d << " k=" << tc.lmnn.k << '\n';
    const auto model = dnt::train(tc);
    dnt::save_model(model, out);
    std::printf("model %s: d=%zu cutoff=%.6g alpha=%g null=%zu\n", out.c_str(), model.selection.d, model.cutoff,
                model.alpha, model.null_distances.size());
    return kOk;
}

int cmd_test(const std::string& model_path, const std::string& data_path)
{
    const auto model = dnt::load_model(model_path);
    const auto x = dnt::parse_sample_text(dnt::read_text_file(data_path));
    const auto r = dnt::dnt_test(x, model);
    std::printf("statistic=%.6g cutoff=%.6g alpha=%g decision=%s\n", r.statistic, r.cutoff, r.alpha,
                r.reject ? "reject" : "accept");
    return r.reject ? kReject : kOk;
}

int cmd_power(const std::string& config_path, const std::string& out)
{
    auto cfg = dnt::load_run_config(config_path);
    if (!out.empty()) cfg.output_csv = out;
    const auto table = dnt::run_power_study(cfg, [](std::string_view s) { std::cerr << s << '\n'; });
    const auto csv = dnt::emit_table(table, dnt::TableFormat::Csv);
    if (cfg.output_csv.empty()) {
        std::cout << csv;
    } else {
        write_text(cfg.output_csv, csv);
    }
    if (!cfg.output_markdown.empty()) write_text(cfg.output_markdown, dnt::emit_table(table, dnt::TableFormat::Markdown));
    if (!cfg.output_csv.empty()) std::cout << dnt::emit_table(table, dnt::TableFormat::Markdown);
    return kOk;
}

int cmd_render(const std::string& dist, std::size_t n, std::uint64_t seed, const std::string& out)
{
    const auto x = dnt::stats::sample(dnt::stats::parse_distribution(dist), n, seed);
    const auto img = dnt::render_sample(x.values);
    std::ofstream os(out, std::ios::binary);
    if (!os) throw dnt::IoError("cannot open output file: " + out);
    dnt::write_pgm(os, img);
    if (!os) throw dnt::IoError("failed writing output file: " + out);
    std::printf("wrote %s (%dx%d, %s, n=%zu, seed=%llu)\n", out.c_str(), img.width, img.height,
                dnt::stats::label(x.spec).c_str(), n, static_cast<unsigned long long>(seed));
    return kOk;
}

int cmd_calibrate(const std::string& stat, std::size_t n, std::size_t reps, double alpha, std::uint64_t seed)
{
    const auto method = dnt::parse_method(stat);
    if (method == dnt::Method::DntRaw || method == dnt::Method::DntImage) {
        throw dnt::ConfigError("DNT cutoffs come from training; use `train` and read the model's cutoff");
    }
    dnt::RunConfig cfg;
    cfg.n = n;
    cfg.calibration_reps = reps;
    cfg.alpha = alpha;
    cfg.master_seed = seed;
    if (reps < 100) throw dnt::ConfigError("--reps must be at least 100");
    const auto ev = dnt::make_evaluator(method, cfg);
    std::printf("%s n=%zu reps=%zu alpha=%g cutoff=%.6g%s\n", std::string(dnt::to_string(method)).c_str(), n, reps,
                alpha, ev.cutoff, ev.direction == dnt::Direction::RejectTwoSided ? " (two-sided, |value|)" : "");
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Q-Q plot normality testing: training, testing and power studies"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string model;
    std::string data;
    std::string dist;
    std::string stat;
    std::size_t n = 100;
    std::size_t reps = 20'000;
    double alpha = 0.05;
    std::uint64_t seed = 20210601;

    auto* train = app.add_subcommand("train", "build and save a DNT model");
    train->add_option("--config", config, "run/train config (key=value or JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out, "model file to write")->required();

    auto* test = app.add_subcommand("test", "test one sample against a saved model");
    test->add_option("--model", model, "model file")->required();
    test->add_option("--data", data, "newline-delimited sample values")->required();

    auto* power = app.add_subcommand("power", "run the power study and write a CSV table");
    power->add_option("--config", config, "run config (key=value or JSON)")->required()->check(CLI::ExistingFile);
    power->add_option("--out", out, "CSV output (stdout when omitted)");

    auto* render = app.add_subcommand("render", "write the Q-Q raster of a simulated sample as PGM");
    render->add_option("--dist", dist, "distribution label, e.g. laplace, t(5), case:8")->required();
    render->add_option("--n", n, "sample size")->check(CLI::Range(3, 1'000'000));
    render->add_option("--seed", seed, "sample seed");
    render->add_option("--out", out, "PGM file to write")->required();

    auto* calibrate = app.add_subcommand("calibrate", "Monte-Carlo cutoff of a statistic under N(0,1)");
    calibrate->add_option("--stat", stat, "KS, AD, JB, GLB, GG, BS, PSNR or SSIM")->required();
    calibrate->add_option("--n", n, "sample size")->check(CLI::Range(8, 1'000'000));
    calibrate->add_option("--reps", reps, "null replicates");
    calibrate->add_option("--alpha", alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    calibrate->add_option("--seed", seed, "master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    const bool testing = test->parsed();
    try {
        if (train->parsed()) return cmd_train(config, out);
        if (testing) return cmd_test(model, data);
        if (power->parsed()) return cmd_power(config, out);
        if (render->parsed()) return cmd_render(dist, n, seed, out);
        if (calibrate->parsed()) return cmd_calibrate(stat, n, reps, alpha, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return testing ? kUsage : exit_code(e);
    }
    return kUsage;
}

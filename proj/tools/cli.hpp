#pragma once

// `fssa` command-line front end. Exit codes: 0 success, 2 user error,
// 3 environment error (e.g. port already in use).

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fssa/benchmark.hpp"
#include "fssa/io.hpp"
#include "fssa/pipeline.hpp"
#include "fssa/service.hpp"
#include "fssa/simulation.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace fssa::cli {

inline constexpr int kOk = 0;
inline constexpr int kUserError = 2;
inline constexpr int kEnvironmentError = 3;

class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigurationError("malformed integer list '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigurationError("empty integer list");
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw EnvironmentError("cannot write '" + path + "'");
    out << text;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what());
    }
}

/// Benchmark setting numbers: 1 = GWN, 2/3/4 = FAR(1) with ||Psi||^2 = 0, 0.5, 0.9.
inline sim::NoiseModel noise_from_json(const nlohmann::json& j) {
    const auto& s = j.at("setting");
    if (s.is_number_integer()) {
        switch (s.get<int>()) {
            case 1: return sim::NoiseModel::gwn();
            case 2: return sim::NoiseModel::far1(0.0);
            case 3: return sim::NoiseModel::far1(0.5);
            case 4: return sim::NoiseModel::far1(0.9);
            default: throw ConfigurationError("setting must be 1..4");
        }
    }
    const auto name = s.get<std::string>();
    if (name == "GWN") return sim::NoiseModel::gwn();
    if (name == "FAR1") return sim::NoiseModel::far1(j.at("hs_norm").get<double>());
    throw ConfigurationError("unknown setting '" + name + "' (expected GWN, FAR1 or 1..4)");
}

inline sim::BenchmarkOptions bench_options_from_json(const nlohmann::json& j) {
    sim::BenchmarkOptions o;
    if (j.contains("reps")) o.reps = j.at("reps").get<int>();
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rank")) o.rank = j.at("rank").get<int>();
    if (j.contains("n")) o.grid_size = j.at("n").get<int>();
    if (j.contains("sigma")) o.sigma = j.at("sigma").get<double>();
    if (j.contains("burn_in")) o.burn_in = j.at("burn_in").get<int>();
    if (j.contains("dof")) o.dof = j.at("dof").get<int>();
    if (j.contains("degree")) o.degree = j.at("degree").get<int>();
    if (j.contains("target")) {
        const auto t = j.at("target").get<std::string>();
        if (t == "signal") o.target = sim::ScoreTarget::signal;
        else if (t == "observed") o.target = sim::ScoreTarget::observed;
        else throw ConfigurationError("target must be 'signal' or 'observed'");
    }
    if (j.contains("mssa_stacking")) {
        const auto t = j.at("mssa_stacking").get<std::string>();
        if (t == "horizontal") o.mssa_stacking = MssaStacking::horizontal;
        else if (t == "vertical") o.mssa_stacking = MssaStacking::vertical;
        else throw ConfigurationError("mssa_stacking must be 'horizontal' or 'vertical'");
    }
    return o;
}

/// Cells come either as an explicit "cells" list or as a "grid" whose
/// cartesian product is taken; grid combinations with L > N/2 are skipped.
inline std::vector<sim::BenchmarkCell> bench_cells_from_json(const nlohmann::json& j, std::ostream& err) {
    std::vector<sim::BenchmarkCell> cells;
    if (j.contains("cells")) {
        for (const auto& c : j.at("cells")) {
            sim::BenchmarkCell cell{noise_from_json(c), c.at("omega").get<double>(), c.at("N").get<int>(),
                                    c.at("L").get<int>()};
            check_window(cell.window, cell.length);
            cells.push_back(cell);
        }
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        std::size_t skipped = 0;
        for (const auto& s : g.at("setting"))
            for (double omega : g.at("omega").get<std::vector<double>>())
                for (int n : g.at("N").get<std::vector<int>>())
                    for (int l : g.at("L").get<std::vector<int>>()) {
                        if (l < 2 || l > n / 2) {
                            ++skipped;
                            continue;
                        }
                        nlohmann::json setting = s.is_object() ? s : nlohmann::json{{"setting", s}};
                        cells.push_back({noise_from_json(setting), omega, n, l});
                    }
        if (skipped) err << "note: skipped " << skipped << " grid cells with L > N/2\n";
    }
    if (cells.empty()) throw ConfigurationError("config defines no benchmark cells");
    return cells;
}

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

inline int cmd_decompose(const std::string& input, int window, std::optional<int> dof, const std::string& gcv,
                         int degree, std::optional<int> rank, const std::string& output, Streams io) {
    const auto data = io::read_series_csv(input, true);
    DecomposeRequest req;
    req.window = window;
    req.dof = dof;
    if (!dof) req.gcv_candidates = parse_int_list(gcv);
    req.degree = degree;
    req.rank = rank;
    const auto rec = decompose_series(data, req);
    write_text(output, io::decomposition_to_json(rec).dump(2) + "\n");
    const auto& dec = rec.decomposition;
    io.out << "N=" << dec.length() << " L=" << dec.window() << " K=" << dec.columns() << " d=" << dec.dim()
           << " r=" << dec.rank() << "\n";
    return kOk;
}

inline int cmd_reconstruct(const std::string& decomposition, const std::string& groups, const std::string& prefix,
                           Streams io) {
    const auto rec = io::read_decomposition(decomposition);
    const auto grouping = Grouping::parse(groups);
    const auto parts = reconstruct_on_grid(rec, grouping);
    for (std::size_t g = 0; g < parts.size(); ++g) {
        const std::string path = prefix + "_group" + std::to_string(g + 1) + ".csv";
        write_text(path, io::series_csv(rec.grid, parts[g]));
        io.out << path << "\n";
    }
    return kOk;
}

inline int cmd_wcor(const std::string& decomposition, const std::string& groups, const std::string& output,
                    Streams io) {
    const auto rec = io::read_decomposition(decomposition);
    const auto w = grouped_wcor(rec, Grouping::parse(groups));
    std::ostringstream csv;
    csv << std::setprecision(std::numeric_limits<double>::max_digits10) << "group";
    for (const auto& l : w.labels) csv << ',' << l;
    csv << '\n';
    for (Eigen::Index i = 0; i < w.values.rows(); ++i) {
        csv << w.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < w.values.cols(); ++c) csv << ',' << w.values(i, c);
        csv << '\n';
    }
    write_text(output, csv.str());
    io.out << output << "\n";
    return kOk;
}

inline int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed, const std::string& output,
                        const std::string& signal_output, Streams io) {
    const auto j = read_json_file(config);
    sim::SimConfig cfg;
    try {
        cfg.length = j.at("N").get<int>();
        if (j.contains("n")) cfg.grid_size = j.at("n").get<int>();
        cfg.omega = j.at("omega").get<double>();
        cfg.noise = noise_from_json(j);
        if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed simulation config: ") + e.what());
    }
    if (seed) cfg.seed = *seed;
    cfg.validate();
    const auto grid = sim::uniform_grid(cfg.grid_size);
    std::mt19937_64 rng(cfg.seed);
    const Eigen::MatrixXd signal = sim::gen_periodic(cfg.length, grid, cfg.omega);
    const Eigen::MatrixXd observed = signal + sim::gen_noise(cfg, grid, rng);
    write_text(output, io::series_csv(grid, observed));
    if (!signal_output.empty()) write_text(signal_output, io::series_csv(grid, signal));
    io.out << output << "\n";
    return kOk;
}

inline int cmd_bench(const std::string& config, std::optional<int> reps, std::optional<std::uint64_t> seed,
                     const std::string& output, Streams io) {
    const auto j = read_json_file(config);
    sim::BenchmarkOptions opt;
    std::vector<sim::BenchmarkCell> cells;
    try {
        opt = bench_options_from_json(j);
        cells = bench_cells_from_json(j, io.err);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed benchmark config: ") + e.what());
    }
    if (reps) opt.reps = *reps;
    if (seed) opt.seed = *seed;
    const auto report = sim::run_benchmark(cells, opt);
    const auto csv = sim::to_csv(report);
    write_text(output + ".csv", csv);
    write_text(output + ".json", sim::to_json(report).dump(2) + "\n");
    io.out << csv;
    return kOk;
}

inline int cmd_serve(const std::string& host, int port, const std::string& data_dir, const std::string& origin,
                     Streams io) {
    std::optional<std::filesystem::path> dir;
    if (!data_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(data_dir, ec);
        if (ec) throw EnvironmentError("cannot create data directory '" + data_dir + "'");
        dir = data_dir;
    }
    service::ExplorerService svc(dir);
    httplib::Server server;
    // httplib's default sets SO_REUSEPORT, which would let a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    svc.mount(server, origin);
    if (!server.bind_to_port(host, port)) throw EnvironmentError("cannot bind " + host + ":" + std::to_string(port));
    io.out << "serving on http://" << host << ":" << port << "/api/v1\n" << std::flush;
    if (!server.listen_after_bind()) throw EnvironmentError("server stopped unexpectedly");
    return kOk;
}

/// Entry point; all failures are reported as a single line on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Functional singular spectrum analysis toolkit", "fssa"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(FSSA_VERSION));
    Streams io{out, err};

    std::string input, output, decomposition, groups, gcv, config, signal_output, data_dir, host = "127.0.0.1",
                                                                                       origin = "*";
    int window = 0, degree = 3, port = 8080;
    std::optional<int> dof, rank, reps;
    std::optional<std::uint64_t> seed;

    auto* dec = app.add_subcommand("decompose", "smooth curves into a B-spline basis and decompose");
    dec->add_option("--input,-i", input, "series CSV")->required();
    dec->add_option("--window,-L", window, "window length L")->required();
    auto* dof_opt = dec->add_option("--dof,-d", dof, "basis dimension d");
    auto* gcv_opt = dec->add_option("--gcv", gcv, "comma-separated candidate dimensions for GCV");
    dof_opt->excludes(gcv_opt);
    dec->add_option("--degree", degree, "B-spline degree")->capture_default_str();
    dec->add_option("--rank,-r", rank, "number of eigentriples to keep");
    dec->add_option("--output,-o", output, "decomposition JSON")->required();

    auto* rec = app.add_subcommand("reconstruct", "reconstruct grouped components");
    rec->add_option("--decomposition", decomposition, "decomposition JSON")->required();
    rec->add_option("--groups,-g", groups, "groups, e.g. \"1;2-3;4,5\"")->required();
    rec->add_option("--output,-o", output, "output prefix")->required();

    auto* wc = app.add_subcommand("wcor", "w-correlation matrix of grouped components");
    wc->add_option("--decomposition", decomposition, "decomposition JSON")->required();
    wc->add_option("--groups,-g", groups, "groups, e.g. \"1;2-3;4,5\"")->required();
    wc->add_option("--output,-o", output, "output CSV")->required();

    auto* simc = app.add_subcommand("simulate", "generate one simulated series as CSV");
    simc->add_option("--config", config, "simulation JSON")->required();
    simc->add_option("--seed", seed, "override the config seed");
    simc->add_option("--output,-o", output, "observed series CSV")->required();
    simc->add_option("--signal-output", signal_output, "noise-free signal CSV");

    auto* bench = app.add_subcommand("bench", "FSSA vs MSSA benchmark");
    bench->add_option("--config", config, "benchmark JSON")->required();
    bench->add_option("--reps", reps, "replications per cell");
    bench->add_option("--seed", seed, "base seed");
    bench->add_option("--output,-o", output, "output prefix (.csv and .json)")->required();

    auto* serve = app.add_subcommand("serve", "run the explorer HTTP service");
    serve->add_option("--port,-p", port, "TCP port")->capture_default_str();
    serve->add_option("--host", host, "bind address")->capture_default_str();
    serve->add_option("--data", data_dir, "directory for persisted series and decompositions");
    serve->add_option("--cors-origin", origin, "Access-Control-Allow-Origin value")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kUserError;
    }

    try {
        if (*dec) {
            if (!dof && gcv.empty()) throw ConfigurationError("one of --dof or --gcv is required");
            return cmd_decompose(input, window, dof, gcv, degree, rank, output, io);
        }
        if (*rec) return cmd_reconstruct(decomposition, groups, output, io);
        if (*wc) return cmd_wcor(decomposition, groups, output, io);
        if (*simc) return cmd_simulate(config, seed, output, signal_output, io);
        if (*bench) return cmd_bench(config, reps, seed, output, io);
        if (*serve) return cmd_serve(host, port, data_dir, origin, io);
    } catch (const EnvironmentError& e) {
        err << "error: " << e.what() << "\n";
        return kEnvironmentError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    }
    return kUserError;
}

}  // namespace fssa::cli

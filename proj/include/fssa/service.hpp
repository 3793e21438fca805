#pragma once

// HTTP/JSON facade used by the interactive explorer. All routes live under
// /api/v1. Uploaded series and finished decompositions are immutable and
// cached in memory (optionally mirrored to a data directory in the CLI file
// formats), so repeated grouping experiments never recompute eigentriples.

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fssa/diagnostics.hpp"
#include "fssa/io.hpp"
#include "fssa/pipeline.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with Eigen internals.
#include <httplib.h>

namespace fssa::service {

using nlohmann::json;

struct Reply {
    int status = 200;
    json body;
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& what) : Error(what) {}
};

class BadRequest : public Error {
public:
    explicit BadRequest(const std::string& what) : Error(what) {}
};

inline Reply error_reply(int status, const std::string& code, const std::string& message) {
    return {status, {{"code", code}, {"message", message}}};
}

/// In-memory store of series and decompositions. Reads are concurrent,
/// inserts exclusive; identical decompose requests that overlap in time share
/// one computation.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt)
        : data_dir_(std::move(data_dir)) {
        if (data_dir_) load();
    }

    std::string add_series(io::SeriesData data) {
        std::unique_lock lock(mutex_);
        const std::string id = "s" + std::to_string(++series_counter_);
        if (data_dir_) {
            std::filesystem::create_directories(*data_dir_ / "series");
            std::ofstream out(*data_dir_ / "series" / (id + ".csv"));
            io::write_series_csv(out, data.grid, data.values);
        }
        series_.emplace(id, std::make_shared<const io::SeriesData>(std::move(data)));
        return id;
    }

    std::shared_ptr<const io::SeriesData> series(const std::string& id) const {
        std::shared_lock lock(mutex_);
        const auto it = series_.find(id);
        if (it == series_.end()) throw NotFound("unknown series '" + id + "'");
        return it->second;
    }

    std::shared_ptr<const io::DecompositionRecord> decomposition(const std::string& id) const {
        std::shared_lock lock(mutex_);
        const auto it = decompositions_.find(id);
        if (it == decompositions_.end()) throw NotFound("unknown decomposition '" + id + "'");
        return it->second;
    }

    /// Returns the id of the decomposition for `key`, computing it with
    /// `compute` unless an identical request finished or is in flight.
    std::string decompose(const std::string& key, const std::function<io::DecompositionRecord()>& compute) {
        std::shared_future<std::string> pending;
        std::promise<std::string> promise;
        bool owner = false;
        {
            std::unique_lock lock(mutex_);
            if (const auto it = inflight_.find(key); it != inflight_.end()) {
                pending = it->second;
            } else {
                pending = promise.get_future().share();
                inflight_.emplace(key, pending);
                owner = true;
            }
        }
        if (!owner) return pending.get();
        try {
            auto rec = std::make_shared<const io::DecompositionRecord>(compute());
            std::unique_lock lock(mutex_);
            const std::string id = "d" + std::to_string(++decomposition_counter_);
            if (data_dir_) {
                std::filesystem::create_directories(*data_dir_ / "decompositions");
                std::ofstream out(*data_dir_ / "decompositions" / (id + ".json"));
                out << io::decomposition_to_json(*rec).dump();
            }
            decompositions_.emplace(id, std::move(rec));
            promise.set_value(id);
        } catch (...) {
            {
                std::unique_lock lock(mutex_);
                inflight_.erase(key);
            }
            promise.set_exception(std::current_exception());
        }
        return pending.get();
    }

private:
    static std::size_t numeric_suffix(const std::string& stem) {
        try {
            return static_cast<std::size_t>(std::stoul(stem.substr(1)));
        } catch (const std::exception&) {
            return 0;
        }
    }

    void load() {
        namespace fs = std::filesystem;
        if (fs::is_directory(*data_dir_ / "series"))
            for (const auto& e : fs::directory_iterator(*data_dir_ / "series")) {
                if (e.path().extension() != ".csv") continue;
                const auto id = e.path().stem().string();
                series_.emplace(id, std::make_shared<const io::SeriesData>(io::read_series_csv(e.path().string(), true)));
                series_counter_ = std::max(series_counter_, numeric_suffix(id));
            }
        if (fs::is_directory(*data_dir_ / "decompositions"))
            for (const auto& e : fs::directory_iterator(*data_dir_ / "decompositions")) {
                if (e.path().extension() != ".json") continue;
                const auto id = e.path().stem().string();
                decompositions_.emplace(
                    id, std::make_shared<const io::DecompositionRecord>(io::read_decomposition(e.path().string())));
                decomposition_counter_ = std::max(decomposition_counter_, numeric_suffix(id));
            }
    }

    std::optional<std::filesystem::path> data_dir_;
    mutable std::shared_mutex mutex_;
    std::size_t series_counter_ = 0;
    std::size_t decomposition_counter_ = 0;
    std::map<std::string, std::shared_ptr<const io::SeriesData>> series_;
    std::map<std::string, std::shared_ptr<const io::DecompositionRecord>> decompositions_;
    std::map<std::string, std::shared_future<std::string>> inflight_;
};

/// Parses {"groups": [[1,2],[3]]} (1-based indices).
inline Grouping grouping_from_json(const json& body) {
    if (!body.is_object() || !body.contains("groups")) throw BadRequest("body must contain 'groups'");
    const auto& groups = body.at("groups");
    if (!groups.is_array()) throw BadRequest("'groups' must be an array of index arrays");
    std::vector<std::vector<int>> out;
    for (const auto& g : groups) {
        if (!g.is_array()) throw BadRequest("'groups' must be an array of index arrays");
        std::vector<int> indices;
        for (const auto& i : g) {
            if (!i.is_number_integer()) throw BadRequest("group indices must be integers");
            const int value = i.get<int>();
            if (value < 1) throw GroupingError("group indices are 1-based");
            indices.push_back(value - 1);
        }
        out.push_back(std::move(indices));
    }
    if (out.empty()) throw GroupingError("at least one group is required");
    return Grouping(std::move(out));
}

inline json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json summary_json(const EigentripleSummary& s, int components) {
    json v = json::array(), curves = json::array(), norms = json::array();
    for (int i = 0; i < components; ++i) {
        v.push_back(vector_json(s.v.col(i)));
        curves.push_back(io::matrix_rows(s.psi_curves[static_cast<std::size_t>(i)]));
        norms.push_back(vector_json(s.lag_norms.col(i)));
    }
    return {{"components", components},
            {"singular_values", vector_json(s.singular_values.head(components))},
            {"percentages", vector_json(s.percentages.head(components))},
            {"dominant_frequency", vector_json(s.dominant_frequency.head(components))},
            {"v", v},
            {"render_grid", s.render_grid},
            {"psi_curves", curves},
            {"lag_norms", norms}};
}

class ExplorerService {
public:
    explicit ExplorerService(std::optional<std::filesystem::path> data_dir = std::nullopt)
        : store_(std::move(data_dir)) {}

    SessionStore& store() noexcept { return store_; }

    Reply health() const { return {200, {{"status", "ok"}, {"version", FSSA_VERSION}}}; }

    Reply post_series(const std::string& csv) {
        return guarded([&] {
            auto data = io::read_series_csv(csv, false);
            const auto n = data.values.rows(), length = data.values.cols();
            const auto id = store_.add_series(std::move(data));
            return Reply{201, {{"series_id", id}, {"N", length}, {"n", n}}};
        });
    }

    Reply decompose(const std::string& series_id, const std::string& body_text) {
        return guarded([&] {
            const json body = parse_body(body_text);
            const auto data = store_.series(series_id);
            DecomposeRequest req;
            try {
                req.window = body.at("L").get<int>();
                if (body.contains("d")) req.dof = body.at("d").get<int>();
                if (body.contains("gcv")) req.gcv_candidates = body.at("gcv").get<std::vector<int>>();
                if (body.contains("r") && !body.at("r").is_null()) req.rank = body.at("r").get<int>();
                if (body.contains("degree")) req.degree = body.at("degree").get<int>();
            } catch (const json::exception& e) {
                throw BadRequest(std::string("invalid decompose body: ") + e.what());
            }
            if (!req.dof && req.gcv_candidates.empty()) throw BadRequest("body needs 'd' or 'gcv'");
            json key_json = {{"series", series_id}, {"L", req.window}, {"degree", req.degree},
                             {"d", req.dof ? json(*req.dof) : json(nullptr)}, {"gcv", req.gcv_candidates},
                             {"r", req.rank ? json(*req.rank) : json(nullptr)}};
            const auto id = store_.decompose(key_json.dump(), [&] { return decompose_series(*data, req); });
            const auto rec = store_.decomposition(id);
            const auto& dec = rec->decomposition;
            return Reply{200, {{"decomposition_id", id}, {"K", dec.columns()}, {"r", dec.rank()}, {"d", dec.dim()},
                               {"L", dec.window()}, {"lambda", vector_json(dec.lambda())}}};
        });
    }

    Reply summary(const std::string& id, int grid_points, std::optional<int> components = std::nullopt) {
        return guarded([&] {
            if (grid_points < 2) throw ConfigurationError("grid must have at least 2 points");
            const auto rec = store_.decomposition(id);
            std::vector<double> grid(static_cast<std::size_t>(grid_points));
            for (int i = 0; i < grid_points; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_points - 1);
            const auto s = eigentriple_summary(rec->decomposition, grid);
            const int r = rec->decomposition.rank();
            return Reply{200, summary_json(s, components ? std::clamp(*components, 1, r) : r)};
        });
    }

    Reply reconstruct(const std::string& id, const std::string& body_text) {
        return guarded([&] {
            const auto grouping = grouping_from_json(parse_body(body_text));
            const auto rec = store_.decomposition(id);
            const auto parts = reconstruct_on_grid(*rec, grouping);
            json components = json::array();
            for (std::size_t g = 0; g < parts.size(); ++g) {
                json indices = json::array();
                for (int i : grouping.groups()[g]) indices.push_back(i + 1);
                components.push_back({{"group", indices},
                                      {"label", Grouping({grouping.groups()[g]}).to_string()},
                                      {"values", io::matrix_rows(parts[g])}});
            }
            return Reply{200, {{"grid", rec->grid}, {"components", components}}};
        });
    }

    Reply wcor(const std::string& id, const std::string& body_text) {
        return guarded([&] {
            const auto grouping = grouping_from_json(parse_body(body_text));
            const auto rec = store_.decomposition(id);
            const auto w = grouped_wcor(*rec, grouping);
            return Reply{200, {{"labels", w.labels}, {"values", io::matrix_rows(w.values)}}};
        });
    }

    /// Registers all routes on `server`.
    void mount(httplib::Server& server, const std::string& cors_origin = "*") {
        server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.Get("/api/v1/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
        server.Post("/api/v1/series", [this](const httplib::Request& req, httplib::Response& res) {
            send(res, post_series(req.body));
        });
        server.Post(R"(/api/v1/series/([A-Za-z0-9_\-]+)/decompose)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        send(res, decompose(req.matches[1], req.body));
                    });
        server.Get(R"(/api/v1/decompositions/([A-Za-z0-9_\-]+)/summary)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       int grid = 200;
                       std::optional<int> components;
                       try {
                           if (req.has_param("grid")) grid = std::stoi(req.get_param_value("grid"));
                           if (req.has_param("components")) components = std::stoi(req.get_param_value("components"));
                       } catch (const std::exception&) {
                           send(res, error_reply(400, "bad_request", "query parameters must be integers"));
                           return;
                       }
                       send(res, summary(req.matches[1], grid, components));
                   });
        server.Post(R"(/api/v1/decompositions/([A-Za-z0-9_\-]+)/reconstruct)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        send(res, reconstruct(req.matches[1], req.body));
                    });
        server.Post(R"(/api/v1/decompositions/([A-Za-z0-9_\-]+)/wcor)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        send(res, wcor(req.matches[1], req.body));
                    });
    }

private:
    static json parse_body(const std::string& text) {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw BadRequest(std::string("body is not valid JSON: ") + e.what());
        }
    }

    template <typename Fn>
    static Reply guarded(Fn&& fn) {
        try {
            return fn();
        } catch (const NotFound& e) {
            return error_reply(404, "not_found", e.what());
        } catch (const BadRequest& e) {
            return error_reply(400, "bad_request", e.what());
        } catch (const FormatError& e) {
            return error_reply(400, "bad_request", e.what());
        } catch (const Error& e) {
            return error_reply(422, "unprocessable", e.what());
        } catch (const json::exception& e) {
            return error_reply(400, "bad_request", e.what());
        }
    }

    static void send(httplib::Response& res, const Reply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    }

    SessionStore store_;
};

}  // namespace fssa::service

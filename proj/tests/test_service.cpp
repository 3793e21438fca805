#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "oracles.hpp"

using namespace fssa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Weekly-style fixture: 3 years of curves over 7 days with an annual cycle and a trend.
std::string fixture_csv() {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> noise(0.0, 0.05);
    const int n = 24, length = 156;
    std::vector<double> grid;
    Eigen::MatrixXd y(n, length);
    for (int i = 0; i < n; ++i) grid.push_back(7.0 * i / (n - 1));
    for (int t = 0; t < length; ++t)
        for (int i = 0; i < n; ++i) {
            const double s = grid[i] / 7.0;
            y(i, t) = 1.0 + 0.005 * t + std::sin(2 * std::numbers::pi * t / 52.0) * std::cos(std::numbers::pi * s) +
                      noise(rng);
        }
    return io::series_csv(grid, y);
}

class ServiceTest : public ::testing::Test {
protected:
    service::ExplorerService svc;

    std::string upload() {
        const auto r = svc.post_series(fixture_csv());
        EXPECT_EQ(r.status, 201);
        return r.body.at("series_id").get<std::string>();
    }
    std::string decompose(const std::string& sid, int window = 20) {
        const auto r = svc.decompose(sid, json{{"L", window}, {"d", 8}}.dump());
        EXPECT_EQ(r.status, 200) << r.body.dump();
        return r.body.at("decomposition_id").get<std::string>();
    }
};

Eigen::MatrixXd rows_to_matrix(const json& rows) {
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

}  // namespace

TEST_F(ServiceTest, HealthAndUpload) {
    EXPECT_EQ(svc.health().status, 200);
    EXPECT_EQ(svc.health().body["status"], "ok");
    const auto r = svc.post_series(fixture_csv());
    EXPECT_EQ(r.body["N"], 156);
    EXPECT_EQ(r.body["n"], 24);
    EXPECT_EQ(r.body["series_id"], "s1");
    const auto bad = svc.post_series("s,a\n0,1\n");
    EXPECT_EQ(bad.status, 400);
    EXPECT_TRUE(bad.body.contains("code"));
    EXPECT_TRUE(bad.body.contains("message"));
}

TEST_F(ServiceTest, DecomposeErrorsAndCaching) {
    const auto sid = upload();
    EXPECT_EQ(svc.decompose("s99", R"({"L": 20, "d": 8})").status, 404);
    EXPECT_EQ(svc.decompose(sid, R"({"L": 100, "d": 8})").status, 422);
    EXPECT_EQ(svc.decompose(sid, R"({"L": 20)").status, 400);
    EXPECT_EQ(svc.decompose(sid, R"({"L": 20})").status, 400);
    EXPECT_EQ(svc.decompose(sid, R"({"L": "x", "d": 8})").status, 400);
    EXPECT_EQ(svc.decompose(sid, R"({"L": 20, "d": 30})").status, 422);
    const auto a = decompose(sid), b = decompose(sid);
    EXPECT_EQ(a, b);
    EXPECT_NE(decompose(sid, 26), a);
    const auto g = svc.decompose(sid, R"({"L": 20, "gcv": [6, 8, 10]})");
    EXPECT_EQ(g.status, 200);
}

TEST_F(ServiceTest, SummaryReconstructWcor) {
    const auto sid = upload();
    const auto did = decompose(sid);
    const auto s = svc.summary(did, 50);
    ASSERT_EQ(s.status, 200);
    double total = 0.0;
    for (const auto& p : s.body["percentages"]) total += p.get<double>();
    EXPECT_NEAR(total, 100.0, 1e-9);
    EXPECT_EQ(s.body["render_grid"].size(), 50u);
    EXPECT_EQ(s.body["psi_curves"][0].size(), 20u);
    EXPECT_EQ(svc.summary(did, 50, 3).body["components"], 3);
    EXPECT_EQ(svc.summary("d42", 50).status, 404);
    EXPECT_EQ(svc.summary(did, 1).status, 422);

    const int r = svc.decompose(sid, R"({"L": 20, "d": 8})").body["r"].get<int>();
    json all = json::array();
    for (int i = 1; i <= r; ++i) all.push_back(i);
    const auto rec = svc.reconstruct(did, json{{"groups", {all}}}.dump());
    ASSERT_EQ(rec.status, 200) << rec.body.dump();
    const auto data = io::read_series_csv(fixture_csv(), false);
    const Eigen::MatrixXd smoothed = smooth_series(data, 8, 3).evaluate(data.unit_grid());
    EXPECT_LE((rows_to_matrix(rec.body["components"][0]["values"]) - smoothed).cwiseAbs().maxCoeff(), 1e-6);

    const auto w1 = svc.wcor(did, R"({"groups": [[1, 2, 3]]})");
    ASSERT_EQ(w1.status, 200);
    EXPECT_EQ(w1.body["values"], json::parse("[[1.0]]"));
    const auto w = svc.wcor(did, R"({"groups": [[1], [2, 3], [4]]})");
    EXPECT_EQ(w.body["labels"], json::parse(R"(["1", "2-3", "4"])"));

    EXPECT_EQ(svc.reconstruct(did, R"({"groups": [[1, 2], [2]]})").status, 422);
    EXPECT_EQ(svc.reconstruct(did, R"({"groups": [[1, 500]]})").status, 422);
    EXPECT_EQ(svc.reconstruct(did, R"({"groups": [["a"]]})").status, 400);
    EXPECT_EQ(svc.reconstruct(did, R"({"nogroups": 1})").status, 400);
    EXPECT_EQ(svc.reconstruct("d77", R"({"groups": [[1]]})").status, 404);
}

TEST(SessionStoreTest, PersistsAcrossRestarts) {
    const auto dir = fs::temp_directory_path() / "fssa_store_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string did;
    {
        service::ExplorerService svc(dir);
        const auto sid = svc.post_series(fixture_csv()).body["series_id"].get<std::string>();
        did = svc.decompose(sid, R"({"L": 20, "d": 8})").body["decomposition_id"].get<std::string>();
    }
    service::ExplorerService again(dir);
    EXPECT_EQ(again.summary(did, 10).status, 200);
    EXPECT_EQ(again.post_series(fixture_csv()).body["series_id"], "s2");
    fs::remove_all(dir);
}

TEST(HttpTest, EndToEndMatchesCli) {
    service::ExplorerService svc;
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/api/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");
    auto options = client.Options("/api/v1/series");
    ASSERT_TRUE(options);
    EXPECT_EQ(options->status, 204);

    const auto csv = fixture_csv();
    auto up = client.Post("/api/v1/series", csv, "text/csv");
    ASSERT_TRUE(up);
    ASSERT_EQ(up->status, 201);
    const auto sid = json::parse(up->body)["series_id"].get<std::string>();
    auto dec = client.Post("/api/v1/series/" + sid + "/decompose", R"({"L": 20, "d": 8})", "application/json");
    ASSERT_EQ(dec->status, 200);
    const auto did = json::parse(dec->body)["decomposition_id"].get<std::string>();
    auto summary = client.Get("/api/v1/decompositions/" + did + "/summary?grid=30&components=4");
    ASSERT_EQ(summary->status, 200);
    EXPECT_EQ(json::parse(summary->body)["components"], 4);
    EXPECT_EQ(client.Get("/api/v1/decompositions/" + did + "/summary?grid=x")->status, 400);
    EXPECT_EQ(client.Get("/api/v1/decompositions/zzz/summary")->status, 404);
    auto rec = client.Post("/api/v1/decompositions/" + did + "/reconstruct", R"({"groups": [[1], [2, 3]]})",
                           "application/json");
    ASSERT_EQ(rec->status, 200);
    const auto body = json::parse(rec->body);
    auto w = client.Post("/api/v1/decompositions/" + did + "/wcor", R"({"groups": [[1], [2, 3]]})", "application/json");
    ASSERT_EQ(w->status, 200);
    EXPECT_EQ(json::parse(w->body)["values"].size(), 2u);

    server.stop();
    thread.join();

    // The same request through the command line gives identical numbers.
    const auto dir = fs::temp_directory_path() / "fssa_http_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream((dir / "y.csv").string()) << csv;
    const auto in = (dir / "y.csv").string(), out = (dir / "d.json").string(), prefix = (dir / "r").string();
    std::ostringstream sink;
    const char* a1[] = {"fssa", "decompose", "-i", in.c_str(), "-L", "20", "-d", "8", "-o", out.c_str()};
    ASSERT_EQ(cli::run(10, a1, sink, sink), 0);
    const char* a2[] = {"fssa", "reconstruct", "--decomposition", out.c_str(), "-g", "1;2-3", "-o", prefix.c_str()};
    ASSERT_EQ(cli::run(8, a2, sink, sink), 0);
    for (int g = 0; g < 2; ++g) {
        const auto file = io::read_series_csv(prefix + "_group" + std::to_string(g + 1) + ".csv", true);
        EXPECT_TRUE(file.values == rows_to_matrix(body["components"][g]["values"])) << "group " << g + 1;
    }
    fs::remove_all(dir);
}

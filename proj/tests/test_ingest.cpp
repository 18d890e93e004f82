#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "seirios/base64.hpp"
#include "seirios/ingest.hpp"
#include "seirios/rng.hpp"
#include "seirios/runner.hpp"
#include "test_helpers.hpp"

using namespace seirios;

namespace {

harness::RunConfig service_config() {
    harness::RunConfig cfg;
    cfg.scenario = test::room_scenario();
    cfg.scenario.aps.push_back({{24.0, 7.5}, 180.0});
    cfg.scenario.aps.push_back({{12.5, 14.5}, 270.0});
    cfg.run.methods = {estimators::Method::EspritConjugated};
    cfg.service.window_sec = 2.0;
    return cfg;
}

// The paper-style burst: one packet per channel, ~30 ms apart, per AP.
std::vector<std::string> burst_lines(const harness::RunConfig& cfg, double t0 = 0.1) {
    std::vector<std::string> lines;
    for (std::size_t g = 0; g < cfg.scenario.aps.size(); ++g) {
        const auto caps = simenv::synthesize_captures(cfg.scenario, static_cast<int>(g));
        for (const auto& cap : caps) {
            harness::UploadRecord rec;
            rec.ap = static_cast<int>(g);
            rec.ts = t0 + 0.03 * cap.channel_index;
            rec.channel = cap.channel_index;
            rec.antenna = cap.antenna_index;
            rec.fc_hz = cap.center_freq_hz;
            rec.iq = cap.samples;
            lines.push_back(harness::record_to_line(rec));
        }
    }
    return lines;
}

}  // namespace

TEST_CASE("base64 round trip and rejection") {
    auto stream = rng::substream(555, {0});
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint8_t> data(stream.next_u64() % 64);
        for (auto& b : data) b = static_cast<std::uint8_t>(stream.next_u64());
        const auto text = harness::base64_encode(data);
        CHECK(harness::base64_decode(text) == data);
    }
    CHECK(harness::base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o'}) == "Zm9v");
    CHECK_THROWS_AS(harness::base64_decode("abc"), std::invalid_argument);
    CHECK_THROWS_AS(harness::base64_decode("a!=="), std::invalid_argument);
    CHECK_THROWS_AS(harness::base64_decode("=abc"), std::invalid_argument);
}

TEST_CASE("upload record line round trip") {
    harness::UploadRecord rec;
    rec.ap = 2;
    rec.ts = 1.25;
    rec.channel = 5;
    rec.antenna = 1;
    rec.fc_hz = 916.0e6;
    rec.iq = {{0.25, -0.5}, {1.0, 0.125}};
    const auto line = harness::record_to_line(rec);
    const auto back = harness::record_from_line(line);
    CHECK(back.ap == rec.ap);
    CHECK(back.ts == rec.ts);
    CHECK(back.channel == rec.channel);
    CHECK(back.antenna == rec.antenna);
    CHECK(back.iq == rec.iq);  // values chosen exactly representable in float

    CHECK_THROWS_AS(harness::record_from_line("{oops"), std::invalid_argument);
    CHECK_THROWS_AS(harness::record_from_line("{\"ap\": 1}"), std::invalid_argument);
}

TEST_CASE("replayed burst yields exactly one estimate") {
    const auto cfg = service_config();
    harness::IngestPipeline pipeline(cfg);
    std::vector<std::string> out;
    for (const auto& line : burst_lines(cfg)) {
        CHECK(pipeline.feed_line(line, out) == "ok");
    }
    CHECK(out.empty());  // window still open
    pipeline.flush(out);
    REQUIRE(out.size() == 1);
    const auto j = nlohmann::json::parse(out[0]);
    CHECK(j.at("type") == "estimate");
    CHECK(j.at("aps").size() == cfg.scenario.aps.size());
    REQUIRE(j.contains("est"));

    // Parity with the batch pipeline on the same captures. The wire format
    // carries float32 IQ, so the batch side sees the same quantization.
    std::vector<fusion::Heatmap> maps;
    fusion::FusionConfig fcfg = cfg.fusion;
    fcfg.grid = cfg.resolve_grid();
    for (std::size_t g = 0; g < cfg.scenario.aps.size(); ++g) {
        auto caps = simenv::synthesize_captures(cfg.scenario, static_cast<int>(g));
        for (auto& cap : caps)
            for (auto& v : cap.samples)
                v = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
        const auto est =
            harness::process_ap_captures(caps, cfg, estimators::Method::EspritConjugated);
        maps.push_back(fusion::heatmap_for_ap(cfg.scenario.aps[g], est, fcfg));
    }
    const auto loc = fusion::locate(fusion::fuse(maps));
    CHECK(j.at("est")[0].get<double>() == loc.x);
    CHECK(j.at("est")[1].get<double>() == loc.y);
}

TEST_CASE("malformed records are rejected without state changes") {
    const auto cfg = service_config();
    harness::IngestPipeline pipeline(cfg);
    std::vector<std::string> out;

    auto lines = burst_lines(cfg);
    auto bad = nlohmann::json::parse(lines[0]);
    bad["channel"] = 99;
    CHECK(pipeline.feed_line(bad.dump(), out).substr(0, 3) == "err");

    bad = nlohmann::json::parse(lines[0]);
    bad["antenna"] = 7;
    CHECK(pipeline.feed_line(bad.dump(), out).substr(0, 3) == "err");

    bad = nlohmann::json::parse(lines[0]);
    bad["fc_hz"] = 999.0e6;
    CHECK(pipeline.feed_line(bad.dump(), out).substr(0, 3) == "err");

    bad = nlohmann::json::parse(lines[0]);
    bad["iq_b64"] = "AAAA";
    CHECK(pipeline.feed_line(bad.dump(), out).substr(0, 3) == "err");

    // Non-monotone timestamp for an AP.
    CHECK(pipeline.feed_line(lines[8], out) == "ok");  // ts 0.1 + 0.03*4
    auto old = nlohmann::json::parse(lines[0]);        // ts 0.1, same AP
    CHECK(pipeline.feed_line(old.dump(), out).substr(0, 3) == "err");

    // The rejected lines left no usable state behind: a clean full burst
    // still produces exactly one estimate.
    harness::IngestPipeline fresh(cfg);
    std::vector<std::string> fresh_out;
    for (const auto& line : burst_lines(cfg)) fresh.feed_line(line, fresh_out);
    fresh.flush(fresh_out);
    CHECK(fresh_out.size() == 1);
}

TEST_CASE("incomplete window is dropped at expiry") {
    const auto cfg = service_config();
    harness::IngestPipeline pipeline(cfg);
    std::vector<std::string> out;

    // 7 of 8 channels from AP 0 only.
    const auto caps = simenv::synthesize_captures(cfg.scenario, 0);
    for (const auto& cap : caps) {
        if (cap.channel_index == 7) continue;
        harness::UploadRecord rec;
        rec.ap = 0;
        rec.ts = 0.1 + 0.03 * cap.channel_index;
        rec.channel = cap.channel_index;
        rec.antenna = cap.antenna_index;
        rec.fc_hz = cap.center_freq_hz;
        rec.iq = cap.samples;
        CHECK(pipeline.feed_line(harness::record_to_line(rec), out) == "ok");
    }
    CHECK(out.empty());

    // A later record pushes stream time past the window end.
    harness::UploadRecord late;
    late.ap = 1;
    late.ts = 4.5;
    late.channel = 0;
    late.antenna = 0;
    late.fc_hz = cfg.scenario.plan.channel_center(0);
    late.iq = std::vector<std::complex<double>>(
        static_cast<std::size_t>(cfg.scenario.chirp.n_preamble) *
        cfg.scenario.chirp.samples_per_symbol());
    CHECK(pipeline.feed_line(harness::record_to_line(late), out) == "ok");

    REQUIRE(out.size() == 1);
    const auto j = nlohmann::json::parse(out[0]);
    CHECK(j.at("type") == "dropped");
    CHECK(j.at("ap") == 0);
    CHECK(j.at("slots_present") == 14);
}

TEST_CASE("TCP server speaks the line protocol") {
    const auto cfg = service_config();
    const auto log_path =
        (std::filesystem::temp_directory_path() / "seirios_ingest_test.jsonl").string();
    std::filesystem::remove(log_path);

    harness::IngestServer server(cfg, log_path);
    server.start(0);
    REQUIRE(server.port() > 0);

    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);

    auto send_line = [&](const std::string& line) {
        std::string msg = line + "\n";
        std::size_t sent = 0;
        while (sent < msg.size()) {
            const ssize_t n = ::send(fd, msg.data() + sent, msg.size() - sent, 0);
            REQUIRE(n > 0);
            sent += static_cast<std::size_t>(n);
        }
        std::string reply;
        char c;
        while (::recv(fd, &c, 1, 0) == 1 && c != '\n') reply.push_back(c);
        return reply;
    };

    for (const auto& line : burst_lines(cfg)) CHECK(send_line(line) == "ok");
    CHECK(send_line("garbage").substr(0, 3) == "err");
    ::close(fd);
    server.stop();  // flushes the open window

    std::ifstream log(log_path);
    REQUIRE(log.good());
    std::string line;
    int estimates = 0;
    while (std::getline(log, line)) {
        if (nlohmann::json::parse(line).at("type") == "estimate") ++estimates;
    }
    CHECK(estimates == 1);
    std::filesystem::remove(log_path);
}

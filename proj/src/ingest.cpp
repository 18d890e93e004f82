#include "seirios/ingest.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "seirios/base64.hpp"
#include "seirios/fusion.hpp"
#include "seirios/runner.hpp"

namespace seirios::harness {

std::string record_to_line(const UploadRecord& record) {
    std::vector<std::uint8_t> raw(record.iq.size() * 2 * sizeof(float));
    for (std::size_t i = 0; i < record.iq.size(); ++i) {
        const float re = static_cast<float>(record.iq[i].real());
        const float im = static_cast<float>(record.iq[i].imag());
        std::memcpy(raw.data() + (2 * i) * sizeof(float), &re, sizeof(float));
        std::memcpy(raw.data() + (2 * i + 1) * sizeof(float), &im, sizeof(float));
    }
    nlohmann::json j;
    j["ap"] = record.ap;
    j["ts"] = record.ts;
    j["channel"] = record.channel;
    j["antenna"] = record.antenna;
    j["fc_hz"] = record.fc_hz;
    j["iq_b64"] = base64_encode(raw);
    return j.dump();
}

UploadRecord record_from_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("record: invalid JSON: ") + e.what());
    }
    UploadRecord r;
    try {
        r.ap = j.at("ap").get<int>();
        r.ts = j.at("ts").get<double>();
        r.channel = j.at("channel").get<int>();
        r.antenna = j.at("antenna").get<int>();
        r.fc_hz = j.at("fc_hz").get<double>();
        const auto raw = base64_decode(j.at("iq_b64").get<std::string>());
        if (raw.size() % (2 * sizeof(float)) != 0)
            throw std::invalid_argument("record: IQ payload is not float32 pairs");
        r.iq.resize(raw.size() / (2 * sizeof(float)));
        for (std::size_t i = 0; i < r.iq.size(); ++i) {
            float re, im;
            std::memcpy(&re, raw.data() + (2 * i) * sizeof(float), sizeof(float));
            std::memcpy(&im, raw.data() + (2 * i + 1) * sizeof(float), sizeof(float));
            r.iq[i] = {static_cast<double>(re), static_cast<double>(im)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("record: missing or bad field: ") + e.what());
    }
    return r;
}

IngestPipeline::IngestPipeline(const RunConfig& cfg) : cfg_(cfg) {
    cfg_.scenario.validate();
    cfg_.fusion.grid = cfg.resolve_grid();
    cfg_.explicit_grid = true;
    slots_per_ap_ = cfg_.scenario.plan.count * cfg_.scenario.geometry.antennas;
    if (cfg_.run.methods.empty() || cfg_.run.methods[0] == estimators::Method::Injected)
        throw std::invalid_argument("ingest: service needs a capture-based method");
}

std::string IngestPipeline::accept_record(const std::string& line, std::optional<Job>& job,
                                          std::vector<std::string>& out) {
    job.reset();
    UploadRecord rec;
    try {
        rec = record_from_line(line);
        const auto& plan = cfg_.scenario.plan;
        if (rec.ap < 0 || rec.ap >= static_cast<int>(cfg_.scenario.aps.size()))
            throw std::invalid_argument("record: unknown ap");
        if (rec.channel < 0 || rec.channel >= plan.count)
            throw std::invalid_argument("record: unknown channel index");
        if (rec.antenna < 0 || rec.antenna >= cfg_.scenario.geometry.antennas)
            throw std::invalid_argument("record: unknown antenna index");
        if (std::abs(rec.fc_hz - plan.channel_center(rec.channel)) > 1.0)
            throw std::invalid_argument("record: center frequency does not match the plan");
        const std::size_t needed = static_cast<std::size_t>(cfg_.scenario.chirp.n_preamble) *
                                   cfg_.scenario.chirp.samples_per_symbol();
        if (rec.iq.size() < needed) throw std::invalid_argument("record: IQ payload too short");
        auto it = last_ts_.find(rec.ap);
        if (it != last_ts_.end() && rec.ts < it->second)
            throw std::invalid_argument("record: timestamps must be monotone per ap");
    } catch (const std::exception& e) {
        return std::string("err ") + e.what();
    }

    last_ts_[rec.ap] = rec.ts;
    const std::int64_t window =
        static_cast<std::int64_t>(std::floor(rec.ts / cfg_.service.window_sec));
    auto& state = pending_[{window, rec.ap}];
    state.slots[{rec.channel, rec.antenna}] = std::move(rec.iq);

    if (static_cast<int>(state.slots.size()) == slots_per_ap_) {
        Job j;
        j.window = window;
        j.ap = rec.ap;
        for (auto& [key, iq] : state.slots) {
            phy::IqCapture cap;
            cap.channel_index = key.first;
            cap.antenna_index = key.second;
            cap.center_freq_hz = cfg_.scenario.plan.channel_center(key.first);
            cap.samples = std::move(iq);
            j.captures.push_back(std::move(cap));
        }
        state.slots.clear();
        state.inflight += 1;
        job = std::move(j);
    }

    advance_time(rec.ts, out);
    return "ok";
}

estimators::AoaEstimate IngestPipeline::process(const Job& job) const {
    return process_ap_captures(job.captures, cfg_, cfg_.run.methods[0]);
}

void IngestPipeline::complete(const Job& job, const estimators::AoaEstimate& estimate,
                              std::vector<std::string>& out) {
    estimates_[job.window][job.ap] = estimate;
    auto it = pending_.find({job.window, job.ap});
    if (it != pending_.end()) {
        it->second.inflight -= 1;
        if (it->second.inflight <= 0 && it->second.slots.empty()) pending_.erase(it);
    }
    // A window whose expiry was deferred by this in-flight job may be
    // closable now.
    auto qit = std::find(close_queue_.begin(), close_queue_.end(), job.window);
    if (qit != close_queue_.end() && window_closable(job.window)) {
        close_queue_.erase(qit);
        close_window(job.window, out);
    }
}

void IngestPipeline::fail(const Job& job, const std::string& reason,
                          std::vector<std::string>& out) {
    auto it = pending_.find({job.window, job.ap});
    if (it != pending_.end()) {
        it->second.inflight -= 1;
        if (it->second.inflight <= 0 && it->second.slots.empty()) pending_.erase(it);
    }
    nlohmann::json j;
    j["type"] = "pipeline_error";
    j["window"] = job.window;
    j["ap"] = job.ap;
    j["error"] = reason;
    out.push_back(j.dump());
    auto qit = std::find(close_queue_.begin(), close_queue_.end(), job.window);
    if (qit != close_queue_.end() && window_closable(job.window)) {
        close_queue_.erase(qit);
        close_window(job.window, out);
    }
}

std::string IngestPipeline::feed_line(const std::string& line, std::vector<std::string>& out) {
    std::optional<Job> job;
    const std::string response = accept_record(line, job, out);
    if (job) {
        try {
            complete(*job, process(*job), out);
        } catch (const std::exception& e) {
            fail(*job, e.what(), out);
        }
    }
    return response;
}

bool IngestPipeline::window_closable(std::int64_t window) const {
    for (const auto& [key, state] : pending_)
        if (key.first == window && state.inflight > 0) return false;
    return true;
}

void IngestPipeline::advance_time(double ts, std::vector<std::string>& out) {
    stream_time_ = std::max(stream_time_, ts);
    std::vector<std::int64_t> expired;
    for (const auto& [key, state] : pending_) {
        (void)state;
        if ((key.first + 1) * cfg_.service.window_sec <= stream_time_)
            expired.push_back(key.first);
    }
    for (const auto& [window, est] : estimates_) {
        (void)est;
        if ((window + 1) * cfg_.service.window_sec <= stream_time_) expired.push_back(window);
    }
    std::sort(expired.begin(), expired.end());
    expired.erase(std::unique(expired.begin(), expired.end()), expired.end());
    for (std::int64_t w : expired) {
        if (window_closable(w)) {
            close_window(w, out);
        } else if (std::find(close_queue_.begin(), close_queue_.end(), w) == close_queue_.end()) {
            close_queue_.push_back(w);
        }
    }
}

void IngestPipeline::close_window(std::int64_t window, std::vector<std::string>& out) {
    // Incomplete channel sets are dropped with a log entry.
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (it->first.first == window) {
            if (!it->second.slots.empty()) {
                nlohmann::json j;
                j["type"] = "dropped";
                j["window"] = window;
                j["ap"] = it->first.second;
                j["slots_present"] = it->second.slots.size();
                j["slots_needed"] = slots_per_ap_;
                out.push_back(j.dump());
            }
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }

    auto est_it = estimates_.find(window);
    if (est_it == estimates_.end()) return;
    const auto& by_ap = est_it->second;
    if (by_ap.size() >= 2) {
        fusion::FusionConfig fcfg = cfg_.fusion;
        std::vector<fusion::Heatmap> maps;
        nlohmann::json aps = nlohmann::json::object();
        for (const auto& [ap, est] : by_ap) {
            if (!est.angles_deg.empty())
                maps.push_back(fusion::heatmap_for_ap(cfg_.scenario.aps[ap], est, fcfg));
            aps[std::to_string(ap)] = est.angles_deg;
        }
        nlohmann::json j;
        j["type"] = "estimate";
        j["window"] = window;
        j["window_end_ts"] = (window + 1) * cfg_.service.window_sec;
        j["method"] = estimators::method_name(cfg_.run.methods[0]);
        j["aps"] = aps;
        if (maps.size() >= 2) {
            const auto loc = fusion::locate(fusion::fuse(maps), cfg_.fusion.locator);
            j["est"] = {loc.x, loc.y};
            j["peak"] = loc.value;
        } else {
            j["error"] = "fewer than 2 usable angle sets";
        }
        out.push_back(j.dump());
    } else {
        nlohmann::json j;
        j["type"] = "dropped";
        j["window"] = window;
        j["reason"] = "fewer than 2 APs completed";
        j["aps_completed"] = by_ap.size();
        out.push_back(j.dump());
    }
    estimates_.erase(est_it);
}

void IngestPipeline::flush(std::vector<std::string>& out) {
    std::vector<std::int64_t> windows;
    for (const auto& [key, state] : pending_) {
        (void)state;
        windows.push_back(key.first);
    }
    for (const auto& [window, est] : estimates_) {
        (void)est;
        windows.push_back(window);
    }
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    for (std::int64_t w : windows) close_window(w, out);
    close_queue_.clear();
}

// --- TCP front end ---------------------------------------------------------

struct IngestServer::Impl {
    Impl(const RunConfig& cfg, std::string log) : pipeline(cfg), log_path(std::move(log)) {}

    IngestPipeline pipeline;
    std::string log_path;
    std::mutex mutex;        // window state
    std::mutex log_mutex;    // result log appends
    std::mutex conn_mutex;   // connection fd registry
    int listen_fd = -1;
    std::atomic<bool> running{false};
    std::thread acceptor;
    std::vector<std::thread> workers;
    std::vector<int> conn_fds;
};

IngestServer::IngestServer(const RunConfig& cfg, std::string log_path)
    : impl_(std::make_unique<Impl>(cfg, std::move(log_path))) {}

IngestServer::~IngestServer() { stop(); }

void IngestServer::start(int port) {
    impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (impl_->listen_fd < 0) throw std::runtime_error("ingest server: socket() failed");
    const int one = 1;
    ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw std::runtime_error("ingest server: bind() failed");
    if (::listen(impl_->listen_fd, 16) != 0)
        throw std::runtime_error("ingest server: listen() failed");
    socklen_t len = sizeof addr;
    ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    impl_->running = true;
    impl_->acceptor = std::thread([this] { accept_loop(); });
}

void IngestServer::stop() {
    if (!impl_ || !impl_->running.exchange(false)) return;
    ::shutdown(impl_->listen_fd, SHUT_RDWR);
    ::close(impl_->listen_fd);
    {
        std::lock_guard<std::mutex> lock(impl_->conn_mutex);
        for (int fd : impl_->conn_fds) ::shutdown(fd, SHUT_RDWR);
    }
    if (impl_->acceptor.joinable()) impl_->acceptor.join();
    for (auto& w : impl_->workers)
        if (w.joinable()) w.join();
    std::vector<std::string> lines;
    {
        std::lock_guard<std::mutex> lock(impl_->mutex);
        impl_->pipeline.flush(lines);
    }
    emit(lines);
}

void IngestServer::accept_loop() {
    while (impl_->running) {
        const int fd = ::accept(impl_->listen_fd, nullptr, nullptr);
        if (fd < 0) break;
        {
            std::lock_guard<std::mutex> lock(impl_->conn_mutex);
            impl_->conn_fds.push_back(fd);
        }
        impl_->workers.emplace_back([this, fd] { handle_connection(fd); });
    }
}

void IngestServer::handle_connection(int fd) {
    std::string buffer;
    char chunk[4096];
    while (impl_->running) {
        const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
        if (got <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(got));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.empty()) continue;

            std::vector<std::string> emitted;
            std::optional<IngestPipeline::Job> job;
            std::string response;
            {
                std::lock_guard<std::mutex> lock(impl_->mutex);
                response = impl_->pipeline.accept_record(line, job, emitted);
            }
            if (job) {
                // The heavy DSP runs outside the window-state lock.
                try {
                    const auto estimate = impl_->pipeline.process(*job);
                    std::lock_guard<std::mutex> lock(impl_->mutex);
                    impl_->pipeline.complete(*job, estimate, emitted);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(impl_->mutex);
                    impl_->pipeline.fail(*job, e.what(), emitted);
                }
            }
            emit(emitted);
            response.push_back('\n');
            ::send(fd, response.data(), response.size(), 0);
        }
    }
    ::close(fd);
}

void IngestServer::emit(const std::vector<std::string>& lines) {
    if (lines.empty()) return;
    std::lock_guard<std::mutex> lock(impl_->log_mutex);
    std::ofstream f(impl_->log_path, std::ios::app);
    for (const auto& l : lines) f << l << '\n';
}

}  // namespace seirios::harness

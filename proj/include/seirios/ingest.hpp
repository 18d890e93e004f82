#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seirios/config.hpp"
#include "seirios/estimators.hpp"
#include "seirios/phy.hpp"

namespace seirios::harness {

// One uploaded packet capture: a single (channel, antenna) slot of one AP,
// IQ payload base64-encoded on the wire.
struct UploadRecord {
    int ap = 0;
    double ts = 0.0;  // seconds; must be monotone per AP
    int channel = 0;
    int antenna = 0;
    double fc_hz = 0.0;
    std::vector<std::complex<double>> iq;
};

std::string record_to_line(const UploadRecord& record);
UploadRecord record_from_line(const std::string& line);  // throws on malformed input

// Time-window grouping and the per-AP processing flow of the cloud
// pipeline. Records fall into windows of cfg.service.window_sec; once an
// AP has all M channels x K antennas of a window, its AoA runs; when a
// window closes (stream time passes its end, or flush) the APs that
// produced estimates are fused into one location result.
//
// Deterministic: time advances with record timestamps only.
class IngestPipeline {
  public:
    explicit IngestPipeline(const RunConfig& cfg);

    // Feed one protocol line. Returns the response ("ok" or "err ...");
    // any result-log lines emitted by window closes are appended to out.
    std::string feed_line(const std::string& line, std::vector<std::string>& out);

    // Finalize all pending windows (connection drained / shutdown).
    void flush(std::vector<std::string>& out);

    // Split protocol for concurrent servers: accept_record validates and
    // stores under the caller's lock and hands back a DSP job when an AP's
    // window completed; process runs lock-free; complete stores the
    // estimate and closes any windows that were waiting on it.
    struct Job {
        std::int64_t window = 0;
        int ap = 0;
        std::vector<phy::IqCapture> captures;
    };
    std::string accept_record(const std::string& line, std::optional<Job>& job,
                              std::vector<std::string>& out);
    estimators::AoaEstimate process(const Job& job) const;
    void complete(const Job& job, const estimators::AoaEstimate& estimate,
                  std::vector<std::string>& out);
    void fail(const Job& job, const std::string& reason, std::vector<std::string>& out);

  private:
    struct WindowState {
        std::map<std::pair<int, int>, std::vector<std::complex<double>>> slots;
        int inflight = 0;  // jobs handed out, not yet completed
    };

    void advance_time(double ts, std::vector<std::string>& out);
    void close_window(std::int64_t window, std::vector<std::string>& out);
    bool window_closable(std::int64_t window) const;

    RunConfig cfg_;
    int slots_per_ap_ = 0;
    std::map<std::pair<std::int64_t, int>, WindowState> pending_;  // (window, ap)
    std::map<std::int64_t, std::map<int, estimators::AoaEstimate>> estimates_;
    std::map<int, double> last_ts_;
    double stream_time_ = -std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> close_queue_;  // windows past expiry with jobs inflight
};

// Line-protocol TCP front end. One thread per connection; window state is
// mutated under a mutex, the DSP pipeline runs outside it. Result lines
// are appended to the log file as windows close.
class IngestServer {
  public:
    IngestServer(const RunConfig& cfg, std::string log_path);
    ~IngestServer();

    void start(int port);  // port 0 picks a free port
    int port() const { return port_; }
    void stop();

  private:
    void accept_loop();
    void handle_connection(int fd);
    void emit(const std::vector<std::string>& lines);

    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace seirios::harness

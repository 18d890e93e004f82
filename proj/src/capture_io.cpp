#include "seirios/capture_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace seirios::harness {

static_assert(std::endian::native == std::endian::little,
              "capture I/O assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'S', 'I', 'Q', 'C'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_capture(const std::string& path, const phy::IqCapture& capture,
                   const phy::ChirpParams& params) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_capture: cannot open " + path);
    auto put = [&](const void* p, std::size_t n) {
        f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(kMagic, 4);
    put(&kVersion, 4);
    const std::uint32_t sf = static_cast<std::uint32_t>(params.sf);
    put(&sf, 4);
    put(&params.bw_hz, 8);
    put(&params.fs_hz, 8);
    const std::uint32_t ch = static_cast<std::uint32_t>(capture.channel_index);
    const std::uint32_t ant = static_cast<std::uint32_t>(capture.antenna_index);
    put(&ch, 4);
    put(&ant, 4);
    put(&capture.center_freq_hz, 8);

    std::vector<float> iq(capture.samples.size() * 2);
    for (std::size_t i = 0; i < capture.samples.size(); ++i) {
        iq[2 * i] = static_cast<float>(capture.samples[i].real());
        iq[2 * i + 1] = static_cast<float>(capture.samples[i].imag());
    }
    put(iq.data(), iq.size() * sizeof(float));
    if (!f) throw std::runtime_error("write_capture: write failed for " + path);
}

phy::IqCapture read_capture(const std::string& path, phy::ChirpParams* params_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_capture: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, sf = 0, ch = 0, ant = 0;
    phy::ChirpParams params;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&sf), 4);
    f.read(reinterpret_cast<char*>(&params.bw_hz), 8);
    f.read(reinterpret_cast<char*>(&params.fs_hz), 8);
    f.read(reinterpret_cast<char*>(&ch), 4);
    f.read(reinterpret_cast<char*>(&ant), 4);
    phy::IqCapture cap;
    f.read(reinterpret_cast<char*>(&cap.center_freq_hz), 8);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_capture: not a capture file: " + path);
    if (version != kVersion)
        throw std::runtime_error("read_capture: unsupported version in " + path);
    params.sf = static_cast<int>(sf);
    cap.channel_index = static_cast<int>(ch);
    cap.antenna_index = static_cast<int>(ant);

    std::vector<float> iq;
    float buf[4096];
    while (f.read(reinterpret_cast<char*>(buf), sizeof buf) || f.gcount() > 0) {
        const std::size_t got = static_cast<std::size_t>(f.gcount()) / sizeof(float);
        iq.insert(iq.end(), buf, buf + got);
        if (!f) break;
    }
    if (iq.size() % 2 != 0) throw std::runtime_error("read_capture: odd float count in " + path);
    cap.samples.resize(iq.size() / 2);
    for (std::size_t i = 0; i < cap.samples.size(); ++i)
        cap.samples[i] = {static_cast<double>(iq[2 * i]), static_cast<double>(iq[2 * i + 1])};
    if (params_out) *params_out = params;
    return cap;
}

std::string capture_filename(int ap, int channel, int antenna) {
    std::ostringstream ss;
    ss << "ap" << ap << "_ch" << channel << "_ant" << antenna << ".iqc";
    return ss.str();
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(config_to_json_text(manifest.config));
    j["captures"] = nlohmann::json::array();
    for (const auto& e : manifest.captures)
        j["captures"].push_back(
            {{"ap", e.ap}, {"channel", e.channel}, {"antenna", e.antenna}, {"file", e.file}});
    j["truth_direct_deg"] = nlohmann::json::array();
    for (double t : manifest.truth_direct_deg) {
        if (std::isnan(t))
            j["truth_direct_deg"].push_back(nullptr);
        else
            j["truth_direct_deg"].push_back(t);
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_manifest: cannot open " + path);
    f << j.dump(2) << '\n';
}

Manifest read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_manifest: cannot open " + path);
    nlohmann::json j;
    f >> j;
    Manifest m;
    m.config = config_from_json_text(j.at("config").dump());
    for (const auto& e : j.at("captures"))
        m.captures.push_back({e.at("ap").get<int>(), e.at("channel").get<int>(),
                              e.at("antenna").get<int>(), e.at("file").get<std::string>()});
    for (const auto& t : j.at("truth_direct_deg"))
        m.truth_direct_deg.push_back(t.is_null() ? std::nan("") : t.get<double>());
    return m;
}

}  // namespace seirios::harness

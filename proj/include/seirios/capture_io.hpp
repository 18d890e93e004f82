#pragma once

#include <string>
#include <vector>

#include "seirios/config.hpp"
#include "seirios/phy.hpp"

namespace seirios::harness {

// Capture file layout (little-endian):
//   magic "SIQC", u32 version (1), u32 sf, f64 bw_hz, f64 fs_hz,
//   u32 channel_index, u32 antenna_index, f64 center_freq_hz,
// followed by interleaved 32-bit float I/Q to end of file.
void write_capture(const std::string& path, const phy::IqCapture& capture,
                   const phy::ChirpParams& params);
phy::IqCapture read_capture(const std::string& path, phy::ChirpParams* params_out = nullptr);

// Conventional file name for one (ap, channel, antenna) slot.
std::string capture_filename(int ap, int channel, int antenna);

struct CaptureSetEntry {
    int ap = 0;
    int channel = 0;
    int antenna = 0;
    std::string file;
};

// simulate's manifest: config echo, capture file list, ground truth.
struct Manifest {
    RunConfig config;
    std::vector<CaptureSetEntry> captures;
    std::vector<double> truth_direct_deg;  // per AP, NaN when out of view
};

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

}  // namespace seirios::harness

#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "heraldsim/coincidence.hpp"
#include "heraldsim/trace.hpp"
#include "heraldsim/types.hpp"

namespace heraldsim {

// Timestamp-stream CSV: header "channel,time_ps", channel 1 = signal,
// 2 = herald, rows sorted by time within channel.

void write_event_csv(std::ostream& os, const EventStream& signal, const EventStream& herald);

/// Reads both channels from CSV. duration_ps < 0 infers the duration as
/// max timestamp + 1 (a sidecar or flag normally supplies the real one).
std::pair<EventStream, EventStream> read_event_csv(std::istream& is, TimePs duration_ps = -1);

void write_event_csv_file(const std::string& path, const EventStream& signal, const EventStream& herald);
std::pair<EventStream, EventStream> read_event_csv_file(const std::string& path, TimePs duration_ps = -1);

// Waveform file format: raw little-endian float32 samples next to a JSON
// sidecar (path + ".json") holding sample_period_ps, t0_ps and polarity.

void write_waveform_file(const std::string& path, const Waveform& w, Polarity polarity = Polarity::positive);
std::pair<Waveform, Polarity> read_waveform_file(const std::string& path);

/// Writes text to path via a temp file + rename so readers never observe a
/// partial file.
void atomic_write_file(const std::string& path, const std::string& content);

} // namespace heraldsim

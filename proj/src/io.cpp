#include "heraldsim/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "heraldsim/errors.hpp"

namespace heraldsim {

void write_event_csv(std::ostream& os, const EventStream& signal, const EventStream& herald) {
    os << "channel,time_ps\n";
    char line[48];
    for (TimePs t : signal.timestamps_ps) {
        std::snprintf(line, sizeof line, "1,%lld\n", static_cast<long long>(t));
        os << line;
    }
    for (TimePs t : herald.timestamps_ps) {
        std::snprintf(line, sizeof line, "2,%lld\n", static_cast<long long>(t));
        os << line;
    }
}

std::pair<EventStream, EventStream> read_event_csv(std::istream& is, TimePs duration_ps) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("event CSV: empty input");
    // tolerate a trailing \r from foreign line endings
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "channel,time_ps") throw IoError("event CSV: expected header 'channel,time_ps'");

    EventStream signal, herald;
    signal.channel = Channel::signal;
    herald.channel = Channel::herald;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        char* end = nullptr;
        const long long chan = std::strtoll(line.c_str(), &end, 10);
        if (end == line.c_str() || *end != ',')
            throw IoError("event CSV: malformed row at line " + std::to_string(lineno));
        const char* tfield = end + 1;
        const long long t = std::strtoll(tfield, &end, 10);
        if (end == tfield) throw IoError("event CSV: malformed time at line " + std::to_string(lineno));
        if (chan == 1)
            signal.timestamps_ps.push_back(t);
        else if (chan == 2)
            herald.timestamps_ps.push_back(t);
        else
            throw IoError("event CSV: channel must be 1 or 2 at line " + std::to_string(lineno));
    }

    if (duration_ps < 0) {
        TimePs max_t = -1;
        if (!signal.timestamps_ps.empty()) max_t = std::max(max_t, signal.timestamps_ps.back());
        if (!herald.timestamps_ps.empty()) max_t = std::max(max_t, herald.timestamps_ps.back());
        duration_ps = max_t + 1;
        if (duration_ps <= 0) duration_ps = 1;
    }
    signal.duration_ps = duration_ps;
    herald.duration_ps = duration_ps;
    signal.validate();
    herald.validate();
    return {std::move(signal), std::move(herald)};
}

void write_event_csv_file(const std::string& path, const EventStream& signal, const EventStream& herald) {
    std::ostringstream body;
    write_event_csv(body, signal, herald);
    atomic_write_file(path, body.str());
}

std::pair<EventStream, EventStream> read_event_csv_file(const std::string& path, TimePs duration_ps) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_event_csv(in, duration_ps);
}

void write_waveform_file(const std::string& path, const Waveform& w, Polarity polarity) {
    w.validate();
    std::vector<float> staged(w.samples.begin(), w.samples.end());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp);
        out.write(reinterpret_cast<const char*>(staged.data()),
                  static_cast<std::streamsize>(staged.size() * sizeof(float)));
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());

    nlohmann::json sidecar = {
        {"sample_period_ps", w.sample_period_ps},
        {"t0_ps", w.t0_ps},
        {"polarity", polarity == Polarity::positive ? "positive" : "negative"},
        {"samples", w.samples.size()},
    };
    atomic_write_file(path + ".json", sidecar.dump(2) + "\n");
}

std::pair<Waveform, Polarity> read_waveform_file(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw IoError("cannot open sidecar " + path + ".json");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad sidecar JSON: ") + e.what());
    }

    Waveform w;
    w.sample_period_ps = meta.at("sample_period_ps").get<TimePs>();
    w.t0_ps = meta.at("t0_ps").get<TimePs>();
    const std::string pol = meta.at("polarity").get<std::string>();
    if (pol != "positive" && pol != "negative") throw IoError("sidecar polarity must be positive|negative");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes % sizeof(float) != 0) throw IoError("waveform file size is not a multiple of 4 bytes");
    std::vector<float> staged(bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(staged.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("short read from " + path);
    w.samples.assign(staged.begin(), staged.end());
    w.validate();
    return {std::move(w), pol == "positive" ? Polarity::positive : Polarity::negative};
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp);
        out << content;
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

} // namespace heraldsim

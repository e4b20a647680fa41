#include "pm2s/pmidi.hpp"

#include "pm2s/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <tuple>

namespace pm2s {

namespace {

constexpr std::uint32_t kDefaultUsPerQuarter = 500000; // 120 BPM
constexpr int kWriterPpq = 480;

struct Reader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    std::size_t remaining() const { return data.size() - pos; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n)
            throw ParseError(std::string("unexpected end of file reading ") + what, pos);
    }

    std::uint8_t u8(const char* what) {
        need(1, what);
        return data[pos++];
    }

    std::uint32_t u16(const char* what) {
        need(2, what);
        std::uint32_t v = (std::uint32_t(data[pos]) << 8) | data[pos + 1];
        pos += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = (std::uint32_t(data[pos]) << 24) | (std::uint32_t(data[pos + 1]) << 16) |
                          (std::uint32_t(data[pos + 2]) << 8) | data[pos + 3];
        pos += 4;
        return v;
    }

    // MIDI variable-length quantity, at most 4 bytes.
    std::uint32_t vlq(const char* what) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            std::uint8_t b = u8(what);
            v = (v << 7) | (b & 0x7f);
            if (!(b & 0x80))
                return v;
        }
        throw ParseError(std::string("variable-length quantity too long in ") + what, pos);
    }

    void skip(std::size_t n, const char* what) {
        need(n, what);
        pos += n;
    }
};

struct TempoChange {
    std::uint64_t tick;
    std::uint32_t us_per_quarter;
};

// Piecewise-linear tick -> seconds map.
class TempoMap {
public:
    explicit TempoMap(std::vector<TempoChange> changes) {
        std::sort(changes.begin(), changes.end(),
                  [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
        segments_.push_back({0, 0.0, kDefaultUsPerQuarter});
        for (const TempoChange& c : changes) {
            Segment& last = segments_.back();
            if (c.tick == last.tick) {
                last.us_per_quarter = c.us_per_quarter;
                continue;
            }
            double sec = seconds_in(last, c.tick);
            segments_.push_back({c.tick, sec, c.us_per_quarter});
        }
    }

    double seconds(std::uint64_t tick, int ppq) const {
        ppq_ = ppq;
        auto it = std::upper_bound(
            segments_.begin(), segments_.end(), tick,
            [](std::uint64_t t, const Segment& s) { return t < s.tick; });
        return seconds_in(*std::prev(it), tick);
    }

    void set_ppq(int ppq) { ppq_ = ppq; }

private:
    struct Segment {
        std::uint64_t tick;
        double start_seconds;
        std::uint32_t us_per_quarter;
    };

    double seconds_in(const Segment& s, std::uint64_t tick) const {
        return s.start_seconds +
               double(tick - s.tick) * double(s.us_per_quarter) / (1e6 * ppq_);
    }

    std::vector<Segment> segments_;
    mutable int ppq_ = kWriterPpq;
};

struct RawNote {
    std::uint64_t on_tick;
    std::uint64_t off_tick;
    int pitch;
    int velocity;
};

struct TrackScan {
    std::vector<RawNote> notes;
    std::vector<TempoChange> tempo_changes;
};

TrackScan scan_track(Reader& r, std::uint32_t length, MidiParseReport& report) {
    TrackScan out;
    const std::size_t track_end = r.pos + length;

    // open[channel][pitch] -> index into out.notes
    std::map<std::pair<int, int>, std::size_t> open;
    std::uint64_t tick = 0;
    std::uint8_t running_status = 0;

    auto close_note = [&](std::size_t idx, std::uint64_t off_tick) {
        out.notes[idx].off_tick = off_tick;
    };

    while (r.pos < track_end) {
        tick += r.vlq("delta time");
        std::uint8_t status = r.u8("event status");
        if (status < 0x80) {
            if (running_status < 0x80)
                throw ParseError("data byte without running status", r.pos - 1);
            --r.pos; // first data byte of a running-status event
            status = running_status;
        }

        if (status == 0xff) { // meta
            std::uint8_t type = r.u8("meta type");
            std::uint32_t len = r.vlq("meta length");
            if (type == 0x51) { // set tempo
                if (len != 3)
                    throw ParseError("set-tempo meta event with bad length", r.pos);
                std::uint32_t us = (std::uint32_t(r.u8("tempo")) << 16);
                us |= std::uint32_t(r.u8("tempo")) << 8;
                us |= r.u8("tempo");
                out.tempo_changes.push_back({tick, us == 0 ? kDefaultUsPerQuarter : us});
            } else {
                r.skip(len, "meta data");
                if (type == 0x2f)
                    break; // end of track
            }
            running_status = 0;
            continue;
        }
        if (status == 0xf0 || status == 0xf7) { // sysex
            std::uint32_t len = r.vlq("sysex length");
            r.skip(len, "sysex data");
            running_status = 0;
            continue;
        }

        running_status = status;
        const int kind = status >> 4;
        const int channel = status & 0x0f;
        switch (kind) {
        case 0x8: { // note off
            int pitch = r.u8("note-off pitch") & 0x7f;
            r.u8("note-off velocity");
            auto it = open.find({channel, pitch});
            if (it != open.end()) {
                close_note(it->second, tick);
                open.erase(it);
            }
            break;
        }
        case 0x9: { // note on (velocity 0 acts as note off)
            int pitch = r.u8("note-on pitch") & 0x7f;
            int vel = r.u8("note-on velocity") & 0x7f;
            auto it = open.find({channel, pitch});
            if (vel == 0) {
                if (it != open.end()) {
                    close_note(it->second, tick);
                    open.erase(it);
                }
                break;
            }
            if (it != open.end()) {
                // Overlapping same-pitch note: last-on wins.
                close_note(it->second, tick);
                open.erase(it);
            }
            out.notes.push_back({tick, tick, pitch, vel});
            open[{channel, pitch}] = out.notes.size() - 1;
            break;
        }
        case 0xa: // polyphonic aftertouch
        case 0xb: // controller
        case 0xe: // pitch bend
            r.skip(2, "channel event data");
            break;
        case 0xc: // program change
        case 0xd: // channel aftertouch
            r.skip(1, "channel event data");
            break;
        default:
            throw ParseError("unknown event status", r.pos - 1);
        }
    }

    if (r.pos > track_end)
        throw ParseError("track data overruns declared chunk length", r.pos);
    r.pos = track_end;

    if (!open.empty()) {
        report.dangling_notes += int(open.size());
        for (auto& [key, idx] : open)
            close_note(idx, tick);
    }
    return out;
}

} // namespace

void canonicalize(Performance& perf) {
    std::stable_sort(perf.notes.begin(), perf.notes.end(),
                     [](const PerformanceNote& a, const PerformanceNote& b) {
                         return std::tie(a.onset, a.pitch, a.duration) <
                                std::tie(b.onset, b.pitch, b.duration);
                     });
}

bool is_canonical(const Performance& perf) {
    return std::is_sorted(perf.notes.begin(), perf.notes.end(),
                          [](const PerformanceNote& a, const PerformanceNote& b) {
                              return std::tie(a.onset, a.pitch, a.duration) <
                                     std::tie(b.onset, b.pitch, b.duration);
                          });
}

Performance parse_midi(std::span<const std::uint8_t> bytes, MidiParseReport* report) {
    Reader r{bytes};
    MidiParseReport local_report;

    r.need(4, "header chunk id");
    if (std::memcmp(bytes.data(), "MThd", 4) != 0)
        throw ParseError("missing MThd header chunk", 0);
    r.pos = 4;
    std::uint32_t header_len = r.u32("header length");
    if (header_len < 6)
        throw ParseError("header chunk too short", r.pos);
    std::size_t header_body = r.pos;
    std::uint32_t format = r.u16("format");
    std::uint32_t num_tracks = r.u16("track count");
    std::uint32_t division = r.u16("division");
    r.pos = header_body + header_len;

    if (format > 1)
        throw ParseError("unsupported MIDI format " + std::to_string(format), header_body);
    if (division & 0x8000)
        throw ParseError("SMPTE time division is not supported", header_body + 4);
    if (division == 0)
        throw ParseError("zero ticks-per-quarter division", header_body + 4);
    const int ppq = int(division);

    std::vector<RawNote> raw;
    std::vector<TempoChange> tempo_changes;
    for (std::uint32_t t = 0; t < num_tracks; ++t) {
        r.need(8, "track chunk header");
        if (std::memcmp(bytes.data() + r.pos, "MTrk", 4) != 0)
            throw ParseError("expected MTrk chunk", r.pos);
        r.pos += 4;
        std::uint32_t len = r.u32("track length");
        r.need(len, "track data");
        TrackScan scan = scan_track(r, len, local_report);
        raw.insert(raw.end(), scan.notes.begin(), scan.notes.end());
        tempo_changes.insert(tempo_changes.end(), scan.tempo_changes.begin(),
                             scan.tempo_changes.end());
    }

    TempoMap tempo(std::move(tempo_changes));
    tempo.set_ppq(ppq);

    Performance perf;
    perf.notes.reserve(raw.size());
    for (const RawNote& n : raw) {
        double on = tempo.seconds(n.on_tick, ppq);
        double off = tempo.seconds(n.off_tick, ppq);
        if (off <= on) {
            ++local_report.zero_length_notes;
            off = tempo.seconds(n.off_tick + 1, ppq);
        }
        perf.notes.push_back({n.pitch, on, off - on, n.velocity});
    }
    canonicalize(perf);

    if (report)
        *report = local_report;
    return perf;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint64_t v) {
    std::uint8_t buf[8];
    int n = 0;
    do {
        buf[n++] = v & 0x7f;
        v >>= 7;
    } while (v);
    for (int i = n - 1; i > 0; --i)
        out.push_back(buf[i] | 0x80);
    out.push_back(buf[0]);
}

struct WriterEvent {
    std::uint64_t tick;
    int order; // note-offs sort before note-ons at the same tick
    int pitch;
    int velocity; // 0 for note-off
};

} // namespace

std::vector<std::uint8_t> write_midi(const Performance& perf) {
    std::vector<WriterEvent> events;
    events.reserve(perf.notes.size() * 2);
    for (const PerformanceNote& n : perf.notes) {
        auto on = std::uint64_t(std::llround(n.onset * kMidiWriterTicksPerSecond));
        auto off = std::uint64_t(std::llround((n.onset + n.duration) * kMidiWriterTicksPerSecond));
        if (off <= on)
            off = on + 1;
        // Velocity 0 would read back as a note-off.
        int vel = std::clamp(n.velocity, 1, 127);
        events.push_back({on, 1, n.pitch, vel});
        events.push_back({off, 0, n.pitch, 0});
    }
    std::sort(events.begin(), events.end(), [](const WriterEvent& a, const WriterEvent& b) {
        return std::tie(a.tick, a.order, a.pitch, a.velocity) <
               std::tie(b.tick, b.order, b.pitch, b.velocity);
    });

    std::vector<std::uint8_t> track;
    // Fixed 120 BPM tempo event at tick 0.
    put_vlq(track, 0);
    track.insert(track.end(), {0xff, 0x51, 0x03, 0x07, 0xa1, 0x20});

    std::uint64_t cursor = 0;
    for (const WriterEvent& e : events) {
        put_vlq(track, e.tick - cursor);
        cursor = e.tick;
        if (e.order == 1) {
            track.push_back(0x90);
            track.push_back(std::uint8_t(e.pitch));
            track.push_back(std::uint8_t(e.velocity));
        } else {
            track.push_back(0x80);
            track.push_back(std::uint8_t(e.pitch));
            track.push_back(0x40);
        }
    }
    // end of track
    put_vlq(track, 0);
    track.insert(track.end(), {0xff, 0x2f, 0x00});

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'M', 'T', 'h', 'd'});
    put_u32(out, 6);
    put_u16(out, 0); // format 0
    put_u16(out, 1); // one track
    put_u16(out, kWriterPpq);
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_u32(out, std::uint32_t(track.size()));
    out.insert(out.end(), track.begin(), track.end());
    return out;
}

} // namespace pm2s

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pm2s {

// One performed note. Timing is wall-clock seconds with the tempo map applied.
struct PerformanceNote {
    int pitch = 0;          // MIDI pitch, [0,127]
    double onset = 0.0;     // seconds, >= 0
    double duration = 0.0;  // seconds, > 0
    int velocity = 0;       // [0,127]

    bool operator==(const PerformanceNote&) const = default;
};

// An ordered set of performed notes, canonically sorted by
// (onset, pitch, duration). The ordering is total and deterministic;
// duplicate notes keep their relative order.
struct Performance {
    std::vector<PerformanceNote> notes;

    std::size_t size() const { return notes.size(); }
    bool empty() const { return notes.empty(); }

    bool operator==(const Performance&) const = default;
};

// Stable-sorts notes into the canonical (onset, pitch, duration) order.
void canonicalize(Performance& perf);
bool is_canonical(const Performance& perf);

struct MidiParseReport {
    // Note-ons that never saw a matching note-off; such notes are closed at
    // the end of their track.
    int dangling_notes = 0;
    // Note pairs that would have zero or negative length (same-tick on/off);
    // their duration is stretched to one tick.
    int zero_length_notes = 0;
};

// Parses a format 0 or 1 Standard MIDI File. All tracks and channels are
// merged into one note list; overlapping same-pitch notes on one channel are
// closed at the later note-on (last-on wins). Throws ParseError with the
// byte offset on malformed chunks.
Performance parse_midi(std::span<const std::uint8_t> bytes,
                       MidiParseReport* report = nullptr);

// Serializes as format 0, 480 PPQ, with a fixed 120 BPM tempo event.
// Timestamps are rounded to the nearest tick (1/960 s), so
// parse_midi(write_midi(p)) matches p within one tick per timestamp.
std::vector<std::uint8_t> write_midi(const Performance& perf);

// Tick quantum of the writer: 480 PPQ at 120 BPM.
inline constexpr double kMidiWriterTicksPerSecond = 960.0;

} // namespace pm2s

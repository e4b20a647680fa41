#pragma once

#include "pm2s/pitch_spelling.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace pm2s {

// Musical-time quantum: 1 tick = 1/24 quarter note.
inline constexpr int kTicksPerQuarter = 24;
// Measure lengths and onsets cover [0, 6] quarters, durations [0, 4].
inline constexpr int kMaxMeasureTicks = 6 * kTicksPerQuarter;      // 144
inline constexpr int kMaxNoteDurationTicks = 4 * kTicksPerQuarter; // 96

// A notated note. Onset/duration are ticks; onset is relative to the start
// of the containing measure. Grace notes carry duration 0.
struct ScoreNote {
    int pitch = 60;   // [0,127]
    int onset = 0;    // ticks within the measure
    int duration = 0; // ticks
    int staff = 0;    // 0 = upper, 1 = lower (h_j)
    int voice = 1;    // [1,8], global numbering across staves
    Stem stem = Stem::None;
    Accidental accidental = Accidental::None;
    bool grace = false;
    bool trill = false;
    bool staccato = false;

    // Engraving state for notes split at barlines; not a token attribute.
    bool tie_start = false;
    bool tie_stop = false;

    bool operator==(const ScoreNote&) const = default;
};

// Compares the eleven token attributes, ignoring tie flags.
bool same_attributes(const ScoreNote& a, const ScoreNote& b);

// A notated rest, produced by gap filling and written out but discarded by
// the parser's note list.
struct Rest {
    int staff = 0;
    int voice = 1;
    int onset = 0;
    int duration = 0;

    bool operator==(const Rest&) const = default;
};

struct TimeSignature {
    int numerator = 4;
    int denominator = 4;

    bool operator==(const TimeSignature&) const = default;
};

struct Measure {
    int length = 0; // ticks
    // Signature in effect at this measure, when one is known.
    std::optional<TimeSignature> time_sig;
    std::vector<ScoreNote> notes; // sorted by (onset, pitch, duration)
    std::vector<Rest> rests;

    bool operator==(const Measure&) const = default;
};

struct Score {
    std::vector<Measure> measures;

    std::size_t note_count() const;
    bool empty() const { return note_count() == 0; }

    // Tick offsets of each measure start from the piece start.
    std::vector<long> measure_starts() const;

    bool operator==(const Score&) const = default;
};

// Stable-sorts notes within each measure by (onset, pitch, duration).
void canonicalize(Score& score);
bool is_canonical(const Score& score);

// A note with its global position, for sequence-level processing.
struct PlacedNote {
    std::size_t measure = 0;
    long absolute_onset = 0; // ticks from piece start
    ScoreNote note;
};

// All notes in canonical global order with absolute tick onsets.
std::vector<PlacedNote> flatten(const Score& score);

} // namespace pm2s

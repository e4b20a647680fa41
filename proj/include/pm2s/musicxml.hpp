#pragma once

#include "pm2s/score.hpp"

#include <string>

namespace pm2s {

// How a pickup (anacrusis) first measure is represented. The default keeps
// the true short length; PadToNominal right-aligns the pickup content inside
// a full measure of the active signature.
enum class AnacrusisMode { TrueLength, PadToNominal };

struct MusicXmlParseOptions {
    AnacrusisMode anacrusis = AnacrusisMode::TrueLength;
};

struct MusicXmlParseReport {
    int merged_tie_segments = 0;   // note elements absorbed into tie chains
    int removed_invisible = 0;     // print-object="no" notes dropped
    int lossy_conversions = 0;     // values snapped to the 1/24 grid
    int clamped_voices = 0;        // voice numbers forced into [1,8]
};

// Parses an uncompressed score-partwise MusicXML document with one piano
// part (1-2 staves). Tied note chains are merged, invisible notes removed,
// rests discarded; all times are converted from document divisions to
// 1/24-quarter ticks with nearest-tick rounding. Throws InputError on
// malformed documents or a missing part.
Score parse_musicxml(const std::string& text, const MusicXmlParseOptions& options = {},
                     MusicXmlParseReport* report = nullptr);

struct MusicXmlWriteReport {
    int spelling_fallbacks = 0; // accidentals inconsistent with any letter
};

// Serializes with divisions=24. Per-voice time cursors are maintained with
// backup/forward so that parse_musicxml(write_musicxml(s)) == s for scores
// satisfying the model invariants.
std::string write_musicxml(const Score& score, MusicXmlWriteReport* report = nullptr);

} // namespace pm2s

#include "pm2s/errors.hpp"
#include "pm2s/musicxml.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace pm2s {

namespace {

namespace pt = boost::property_tree;

int text_to_int(const pt::ptree& node, int fallback) {
    try {
        std::string s = node.get_value<std::string>();
        if (s.empty())
            return fallback;
        return std::stoi(s);
    } catch (...) {
        return fallback;
    }
}

int child_int(const pt::ptree& node, const char* key, int fallback) {
    auto c = node.get_child_optional(key);
    return c ? text_to_int(*c, fallback) : fallback;
}

Accidental accidental_from_name(const std::string& name) {
    if (name == "flat-flat" || name == "double-flat")
        return Accidental::DoubleFlat;
    if (name == "flat")
        return Accidental::Flat;
    if (name == "natural")
        return Accidental::Natural;
    if (name == "sharp")
        return Accidental::Sharp;
    if (name == "double-sharp" || name == "sharp-sharp")
        return Accidental::DoubleSharp;
    return Accidental::None;
}

bool has_descendant(const pt::ptree& node, const std::string& name) {
    for (const auto& [key, child] : node) {
        if (key == name)
            return true;
        if (key != "<xmlattr>" && has_descendant(child, name))
            return true;
    }
    return false;
}

// Converts a value in document division units to 1/24-quarter ticks.
int to_ticks(long divisions_value, int divisions, int* lossy) {
    long num = divisions_value * kTicksPerQuarter;
    if (num % divisions != 0 && lossy)
        ++(*lossy);
    return int(std::lround(double(num) / divisions));
}

struct PendingNote {
    ScoreNote note;
    std::size_t measure = 0;
    long absolute_onset = 0; // ticks
    bool consumed = false;
};

} // namespace

Score parse_musicxml(const std::string& text, const MusicXmlParseOptions& options,
                     MusicXmlParseReport* report) {
    MusicXmlParseReport local;

    pt::ptree doc;
    try {
        std::istringstream in(text);
        pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw InputError(std::string("MusicXML parse failed: ") + e.what());
    }

    auto partwise = doc.get_child_optional("score-partwise");
    if (!partwise)
        throw InputError("document has no score-partwise root");
    auto part = partwise->get_child_optional("part");
    if (!part)
        throw InputError("score-partwise has no part");

    int divisions = 1;
    std::optional<TimeSignature> active_sig;

    std::vector<Measure> measures;
    std::vector<PendingNote> pending; // document order, across measures

    long piece_start_of_measure = 0;

    for (const auto& [mkey, melem] : *part) {
        if (mkey != "measure")
            continue;
        Measure measure;

        long cursor = 0;       // division units within the measure
        long extent = 0;       // max cursor position reached
        long prev_note_start = 0;
        bool saw_note = false;

        for (const auto& [key, elem] : melem) {
            if (key == "attributes") {
                divisions = child_int(elem, "divisions", divisions);
                if (auto time = elem.get_child_optional("time")) {
                    TimeSignature sig;
                    sig.numerator = child_int(*time, "beats", 4);
                    sig.denominator = child_int(*time, "beat-type", 4);
                    active_sig = sig;
                }
            } else if (key == "backup") {
                cursor -= child_int(elem, "duration", 0);
                cursor = std::max(cursor, 0L);
            } else if (key == "forward") {
                cursor += child_int(elem, "duration", 0);
                extent = std::max(extent, cursor);
            } else if (key == "note") {
                const bool grace = elem.get_child_optional("grace").has_value();
                const bool chord = elem.get_child_optional("chord").has_value();
                const bool rest = elem.get_child_optional("rest").has_value();
                const long dur = grace ? 0 : child_int(elem, "duration", 0);
                const long start = chord ? prev_note_start : cursor;

                if (!chord) {
                    prev_note_start = start;
                    cursor = start + dur;
                    extent = std::max(extent, cursor);
                } else {
                    extent = std::max(extent, start + dur);
                }

                if (rest)
                    continue;
                if (elem.get<std::string>("<xmlattr>.print-object", "yes") == "no") {
                    ++local.removed_invisible;
                    continue;
                }
                auto pitch_elem = elem.get_child_optional("pitch");
                if (!pitch_elem)
                    continue;

                ScoreNote note;
                Spelling sp;
                sp.step = letter_step(pitch_elem->get<std::string>("step", "C")[0]);
                if (sp.step < 0)
                    sp.step = 0;
                sp.alter = child_int(*pitch_elem, "alter", 0);
                sp.octave = child_int(*pitch_elem, "octave", 4);
                note.pitch = std::clamp(spelling_to_pitch(sp), 0, 127);

                if (auto acc = elem.get_child_optional("accidental"))
                    note.accidental = accidental_from_name(acc->get_value<std::string>());

                note.onset = to_ticks(start, divisions, &local.lossy_conversions);
                note.duration = grace ? 0 : to_ticks(dur, divisions, &local.lossy_conversions);
                note.grace = grace;

                int voice = child_int(elem, "voice", 1);
                if (voice < 1 || voice > 8) {
                    ++local.clamped_voices;
                    voice = std::clamp(voice, 1, 8);
                }
                note.voice = voice;
                note.staff = child_int(elem, "staff", 1) >= 2 ? 1 : 0;

                if (auto stem = elem.get_child_optional("stem")) {
                    std::string s = stem->get_value<std::string>();
                    note.stem = s == "up" ? Stem::Up : s == "down" ? Stem::Down : Stem::None;
                }

                for (const auto& [nkey, nelem] : elem) {
                    if (nkey == "tie") {
                        std::string type = nelem.get<std::string>("<xmlattr>.type", "");
                        if (type == "start")
                            note.tie_start = true;
                        else if (type == "stop")
                            note.tie_stop = true;
                    } else if (nkey == "notations") {
                        if (has_descendant(nelem, "trill-mark"))
                            note.trill = true;
                        if (has_descendant(nelem, "staccato"))
                            note.staccato = true;
                    }
                }

                PendingNote pn;
                pn.note = note;
                pn.measure = measures.size();
                pn.absolute_onset = piece_start_of_measure + note.onset;
                pending.push_back(pn);
                saw_note = true;
            }
        }

        measure.length = to_ticks(extent, divisions, nullptr);
        if (measure.length == 0 && !saw_note && active_sig) {
            long nominal = long(active_sig->numerator) * 4 * kTicksPerQuarter /
                           active_sig->denominator;
            measure.length = int(nominal);
        }
        measure.time_sig = active_sig;

        // Pickup handling: pad a short first measure up to the signature.
        if (measures.empty() && options.anacrusis == AnacrusisMode::PadToNominal && active_sig) {
            long nominal =
                long(active_sig->numerator) * 4 * kTicksPerQuarter / active_sig->denominator;
            if (measure.length < nominal) {
                int shift = int(nominal - measure.length);
                for (PendingNote& pn : pending)
                    if (pn.measure == 0) {
                        pn.note.onset += shift;
                        pn.absolute_onset += shift;
                    }
                measure.length = int(nominal);
            }
        }

        measures.push_back(std::move(measure));
        piece_start_of_measure += measures.back().length;
    }

    if (measures.empty())
        throw InputError("part contains no measures");

    // Merge tied chains: a start segment absorbs the following stop segment
    // of the same pitch and voice that begins exactly where it ends.
    for (std::size_t i = 0; i < pending.size(); ++i) {
        PendingNote& head = pending[i];
        if (head.consumed || !head.note.tie_start)
            continue;
        long chain_end = head.absolute_onset + head.note.duration;
        bool open = true;
        while (open) {
            open = false;
            for (std::size_t j = i + 1; j < pending.size(); ++j) {
                PendingNote& seg = pending[j];
                if (seg.consumed || !seg.note.tie_stop)
                    continue;
                if (seg.note.pitch != head.note.pitch || seg.note.voice != head.note.voice)
                    continue;
                if (seg.absolute_onset != chain_end)
                    continue;
                head.note.duration += seg.note.duration;
                head.note.trill = head.note.trill || seg.note.trill;
                head.note.staccato = head.note.staccato || seg.note.staccato;
                chain_end += seg.note.duration;
                seg.consumed = true;
                ++local.merged_tie_segments;
                open = seg.note.tie_start; // chain continues
                break;
            }
        }
        head.note.tie_start = false;
        head.note.tie_stop = false;
    }

    Score score;
    score.measures = std::move(measures);
    for (PendingNote& pn : pending) {
        if (pn.consumed)
            continue;
        pn.note.tie_start = false;
        pn.note.tie_stop = false;
        score.measures[pn.measure].notes.push_back(pn.note);
    }
    canonicalize(score);

    if (report)
        *report = local;
    return score;
}

} // namespace pm2s

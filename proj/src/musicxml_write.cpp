#include "pm2s/musicxml.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>
#include <vector>

namespace pm2s {

namespace {

const char* accidental_name(Accidental acc) {
    switch (acc) {
    case Accidental::DoubleFlat: return "flat-flat";
    case Accidental::Flat: return "flat";
    case Accidental::Natural: return "natural";
    case Accidental::Sharp: return "sharp";
    case Accidental::DoubleSharp: return "double-sharp";
    case Accidental::None: return "";
    }
    return "";
}

// Either a note or a rest, scheduled on a voice's timeline.
struct VoiceItem {
    int onset = 0;
    int duration = 0;
    const ScoreNote* note = nullptr; // null for rests
    const Rest* rest = nullptr;
};

struct Emitter {
    std::ostringstream out;
    int indent = 0;

    void line(const std::string& s) {
        for (int i = 0; i < indent; ++i)
            out << "  ";
        out << s << "\n";
    }
    void open(const std::string& tag) {
        line("<" + tag + ">");
        ++indent;
    }
    void close(const std::string& tag) {
        --indent;
        line("</" + tag + ">");
    }
    void leaf(const std::string& tag, const std::string& text) {
        line("<" + tag + ">" + text + "</" + tag + ">");
    }
    void leaf(const std::string& tag, long value) { leaf(tag, std::to_string(value)); }
};

void emit_note(Emitter& xml, const ScoreNote& n, MusicXmlWriteReport& report) {
    bool fallback = false;
    Spelling sp = derive_spelling(n.pitch, n.accidental, &fallback);
    if (fallback)
        ++report.spelling_fallbacks;

    xml.open("note");
    if (n.grace)
        xml.line("<grace/>");
    xml.open("pitch");
    xml.leaf("step", std::string(1, step_letter(sp.step)));
    if (sp.alter != 0)
        xml.leaf("alter", sp.alter);
    xml.leaf("octave", sp.octave);
    xml.close("pitch");
    if (!n.grace)
        xml.leaf("duration", n.duration);
    if (n.tie_start)
        xml.line("<tie type=\"start\"/>");
    if (n.tie_stop)
        xml.line("<tie type=\"stop\"/>");
    xml.leaf("voice", n.voice);
    if (n.grace)
        xml.leaf("type", "eighth");
    if (n.stem == Stem::Up)
        xml.leaf("stem", "up");
    else if (n.stem == Stem::Down)
        xml.leaf("stem", "down");
    // The displayed accidental; dropped spellings fall back to none.
    if (n.accidental != Accidental::None && !fallback)
        xml.leaf("accidental", accidental_name(n.accidental));
    xml.leaf("staff", n.staff + 1);
    if (n.trill || n.staccato || n.tie_start || n.tie_stop) {
        xml.open("notations");
        if (n.tie_start)
            xml.line("<tied type=\"start\"/>");
        if (n.tie_stop)
            xml.line("<tied type=\"stop\"/>");
        if (n.trill) {
            xml.open("ornaments");
            xml.line("<trill-mark/>");
            xml.close("ornaments");
        }
        if (n.staccato) {
            xml.open("articulations");
            xml.line("<staccato/>");
            xml.close("articulations");
        }
        xml.close("notations");
    }
    xml.close("note");
}

void emit_rest(Emitter& xml, const Rest& r) {
    xml.open("note");
    xml.line("<rest/>");
    xml.leaf("duration", r.duration);
    xml.leaf("voice", r.voice);
    xml.leaf("staff", r.staff + 1);
    xml.close("note");
}

} // namespace

std::string write_musicxml(const Score& score, MusicXmlWriteReport* report) {
    MusicXmlWriteReport local;

    int staves = 1;
    for (const Measure& m : score.measures)
        for (const ScoreNote& n : m.notes)
            if (n.staff > 0)
                staves = 2;

    Emitter xml;
    xml.out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 3.1 "
               "Partwise//EN\" \"http://www.musicxml.org/dtds/partwise.dtd\">\n";
    xml.open("score-partwise version=\"3.1\"");
    xml.indent = 1;
    xml.line("<part-list>");
    xml.indent = 2;
    xml.line("<score-part id=\"P1\">");
    xml.indent = 3;
    xml.leaf("part-name", "Piano");
    xml.indent = 2;
    xml.line("</score-part>");
    xml.indent = 1;
    xml.line("</part-list>");
    xml.line("<part id=\"P1\">");
    xml.indent = 2;

    std::optional<TimeSignature> emitted_sig;
    for (std::size_t mi = 0; mi < score.measures.size(); ++mi) {
        const Measure& m = score.measures[mi];
        xml.line("<measure number=\"" + std::to_string(mi + 1) + "\">");
        ++xml.indent;

        const bool first = mi == 0;
        const bool sig_changed = m.time_sig.has_value() && m.time_sig != emitted_sig;
        if (first || sig_changed) {
            xml.open("attributes");
            if (first)
                xml.leaf("divisions", kTicksPerQuarter);
            if (sig_changed) {
                xml.open("time");
                xml.leaf("beats", m.time_sig->numerator);
                xml.leaf("beat-type", m.time_sig->denominator);
                xml.close("time");
                emitted_sig = m.time_sig;
            }
            if (first)
                xml.leaf("staves", staves);
            xml.close("attributes");
        }

        // Schedule notes and rests on their voices.
        std::vector<VoiceItem> items;
        items.reserve(m.notes.size() + m.rests.size());
        for (const ScoreNote& n : m.notes)
            items.push_back({n.onset, n.grace ? 0 : n.duration, &n, nullptr});
        for (const Rest& r : m.rests)
            items.push_back({r.onset, r.duration, nullptr, &r});

        std::stable_sort(items.begin(), items.end(), [](const VoiceItem& a, const VoiceItem& b) {
            int va = a.note ? a.note->voice : a.rest->voice;
            int vb = b.note ? b.note->voice : b.rest->voice;
            int pa = a.note ? a.note->pitch : -1;
            int pb = b.note ? b.note->pitch : -1;
            return std::tie(va, a.onset, pa, a.duration) < std::tie(vb, b.onset, pb, b.duration);
        });

        long cursor = 0;
        long extent = 0;
        int current_voice = -1;
        for (const VoiceItem& item : items) {
            int voice = item.note ? item.note->voice : item.rest->voice;
            if (voice != current_voice && current_voice != -1 && cursor > 0) {
                xml.open("backup");
                xml.leaf("duration", cursor);
                xml.close("backup");
                cursor = 0;
            }
            current_voice = voice;
            if (item.onset > cursor) {
                xml.open("forward");
                xml.leaf("duration", item.onset - cursor);
                xml.close("forward");
                cursor = item.onset;
            } else if (item.onset < cursor) {
                xml.open("backup");
                xml.leaf("duration", cursor - item.onset);
                xml.close("backup");
                cursor = item.onset;
            }
            if (item.note)
                emit_note(xml, *item.note, local);
            else
                emit_rest(xml, *item.rest);
            cursor += item.duration;
            extent = std::max(extent, cursor);
        }

        // Pad so the parsed extent reproduces the stored measure length.
        if (extent < m.length) {
            xml.open("forward");
            xml.leaf("duration", m.length - cursor);
            xml.close("forward");
        }

        --xml.indent;
        xml.line("</measure>");
    }

    xml.indent = 1;
    xml.line("</part>");
    xml.indent = 0;
    xml.line("</score-partwise>");

    if (report)
        *report = local;
    return xml.out.str();
}

} // namespace pm2s

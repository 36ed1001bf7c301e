#include <fstream>
#include <sstream>

#include "dd2/analysis.h"
#include "dd2/error.h"

namespace dd2 {

std::string format_hours(Hours h) { return std::to_string(h) + (h == 1 || h == -1 ? " hour" : " hours"); }

std::string format_money(Money m) {
  std::string digits = std::to_string(m < 0 ? -m : m);
  std::string grouped;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && (digits.size() - i) % 3 == 0) grouped += ',';
    grouped += digits[i];
  }
  return (m < 0 ? "-\xC2\xA3" : "\xC2\xA3") + grouped;
}

namespace {

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string signed_money(Money m) { return m > 0 ? "+" + format_money(m) : format_money(m); }

const char* kStyle =
    "body{font-family:Helvetica,Arial,sans-serif;margin:0;padding:1em}"
    ".card{width:63mm;min-height:88mm;border:1px solid #333;border-radius:3mm;padding:4mm;box-sizing:border-box;"
    "page-break-after:always}"
    ".card h1{font-size:13pt;margin:0 0 2mm}"
    ".kind{font-size:8pt;text-transform:uppercase;color:#666}"
    ".desc{font-size:9pt}"
    "table{width:100%;font-size:8pt;border-collapse:collapse}"
    "td,th{border-top:1px solid #ccc;padding:1mm;text-align:left}"
    "@media print{body{padding:0}}";

std::string page(std::string_view title, std::string_view body) {
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << esc(title)
     << "</title>\n<style>" << kStyle << "</style>\n</head>\n<body>\n"
     << body << "</body>\n</html>\n";
  return os.str();
}

std::string event_card(const EventSpec& e) {
  std::ostringstream os;
  os << "<div class=\"card event\">\n<div class=\"kind\">Event";
  if (!e.category.empty()) os << " &middot; " << esc(e.category);
  os << "</div>\n<h1>" << esc(e.title) << "</h1>\n<p class=\"desc\">" << esc(e.description) << "</p>\n";
  if (e.choices.empty()) {
    os << "<p class=\"desc\"><em>Takes effect immediately.</em></p>\n";
  } else {
    os << "<table>\n<tr><th>Choice</th><th>Time</th><th>Profit</th><th>Share</th></tr>\n";
    for (const auto& c : e.choices)
      os << "<tr><td>" << esc(c.label) << "</td><td>" << format_hours(c.hours_cost) << "</td><td>"
         << (c.profit_delta ? signed_money(c.profit_delta) : "-") << "</td><td>"
         << (c.share_delta ? signed_money(c.share_delta) : "-") << "</td></tr>\n";
    os << "<tr><td>Ignore this round</td><td>" << format_hours(0) << "</td><td>-</td><td>-</td></tr>\n";
    os << "</table>\n";
  }
  os << "</div>\n";
  return page(e.title, os.str());
}

std::string upgrade_card(const Upgrade& u, const Scenario& s) {
  const auto* a = s.find_asset(u.asset_id);
  std::ostringstream os;
  os << "<div class=\"card upgrade\">\n<div class=\"kind\">Upgrade &middot; " << esc(a ? a->name : u.asset_id)
     << "</div>\n<h1>" << esc(u.name) << "</h1>\n<table>\n"
     << "<tr><th>Time</th><td>" << format_hours(u.hours_cost) << "</td></tr>\n"
     << "<tr><th>Cost</th><td>" << format_money(u.profit_cost) << "</td></tr>\n"
     << "<tr><th>Repeatable</th><td>" << (u.repeatable ? "yes" : "no") << "</td></tr>\n"
     << "</table>\n</div>\n";
  return page(u.name, os.str());
}

}  // namespace

CardDeck export_cards(const Scenario& s) {
  CardDeck deck;
  std::ostringstream idx;
  idx << "<h1>" << esc(s.meta.name) << "</h1>\n<h2>Events</h2>\n<ol>\n";
  for (const auto& e : s.events) {
    deck.cards.push_back({"event-" + e.id + ".html", event_card(e)});
    idx << "<li><a href=\"event-" << esc(e.id) << ".html\">" << esc(e.title) << "</a></li>\n";
  }
  idx << "</ol>\n<h2>Upgrades</h2>\n<ol>\n";
  for (const auto& u : s.upgrades) {
    deck.cards.push_back({"upgrade-" + u.id + ".html", upgrade_card(u, s)});
    idx << "<li><a href=\"upgrade-" << esc(u.id) << ".html\">" << esc(u.name) << "</a></li>\n";
  }
  idx << "</ol>\n";
  deck.index = {"index.html", page(s.meta.name + " cards", idx.str())};
  return deck;
}

void write_cards(const CardDeck& deck, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::StoreUnavailable, "cannot create " + dir.string() + ": " + ec.message());
  auto put = [&](const CardDocument& d) {
    std::ofstream f(dir / d.filename, std::ios::binary);
    f << d.html;
    if (!f) throw Error(ErrorCode::StoreUnavailable, "cannot write " + (dir / d.filename).string());
  };
  for (const auto& d : deck.cards) put(d);
  put(deck.index);
}

}  // namespace dd2

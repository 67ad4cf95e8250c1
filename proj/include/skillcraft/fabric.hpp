// Deterministic simulated backends for the 21 task families, plus per-task
// workspaces. Data tools answer from a keyed pseudo-random function of
// (seed, family, tool, canonical args): same inputs, same bytes, no network.
// Payloads carry the oracle-relevant fields plus a fixed-size verbose filler
// so that raw tool traffic is realistically heavy.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillcraft/value.hpp"

namespace skillcraft::fabric {

// ---------------------------------------------------------------------------
// Keyed PRF

namespace prf {

inline std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t key(std::uint64_t seed, std::string_view family, std::string_view tool,
                         std::string_view canonical_args) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xFF);
  h = fnv1a(h, std::string_view(seed_bytes, 8));
  h = fnv1a(h, family);
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, tool);
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, canonical_args);
  return h;
}

struct Stream {
  std::uint64_t state;
  std::uint64_t next() {  // splitmix64
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

}  // namespace prf

// Canonical argument form for hashing: record keys sorted, canonical
// serialization, so argument order never changes a payload.
inline std::string canonical_args(const Record& args) {
  std::vector<std::pair<std::string, Value>> items(args.items().begin(), args.items().end());
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Record sorted;
  for (auto& [k, v] : items) sorted.set(k, v);
  return serialize(Value(sorted));
}

// ---------------------------------------------------------------------------
// Family definitions

enum class FieldKind {
  Echo,        // echoes the tool's argument
  CountryName,
  PersonName,
  Word,
  Adjective,
  Phrase,
  Era,
  YesNo,
  IdNum,       // numeric id rendered as a string, usable as a link
  Count,       // integer 0..100; derived metrics draw from these
  RangeStr,    // "lo-hi"
  EntityList,  // names drawn from the family's own entity pool
  PeopleList,
  WordList,
};

struct FieldDef {
  const char* name;
  FieldKind kind;
};

struct ToolDef {
  const char* name;
  const char* param;
  int link;  // index into the profile tool's fields supplying this tool's argument; -1 = profile tool
  const char* blurb;
  std::vector<FieldDef> fields;
};

struct MetricSource {
  const char* tool;
  const char* field;
};

struct FamilyDef {
  const char* id;
  const char* domain;
  const char* unit;   // singular noun for prompts, e.g. "cocktail"
  const char* title;
  const char* output_file;
  std::vector<const char*> entities;  // selection pool, at least 10 names
  std::vector<ToolDef> tools;         // tools[0] is the profile tool
  const char* metric_name;
  const char* status_name;
  const char* band_hi;
  const char* band_mid;
  const char* band_lo;
  std::vector<MetricSource> metric_priority;  // downstream count fields, highest weight first
};

inline const std::vector<FamilyDef>& families() {
  static const std::vector<FamilyDef> defs = {
      {"cat-facts-collector", "Reference", "cat breed", "Cat Facts Collector",
       "cat_encyclopedia.json",
       {"Persian", "Siamese", "Maine Coon", "Bengal", "Ragdoll", "Sphynx", "British Shorthair",
        "Abyssinian", "Russian Blue", "Norwegian Forest"},
       {{"breed_profile", "breed_name", -1, "Get breed info and characteristics",
         {{"breed", FieldKind::Echo},
          {"origin", FieldKind::CountryName},
          {"coat", FieldKind::Adjective},
          {"life_span", FieldKind::RangeStr},
          {"temperament", FieldKind::Phrase}}},
        {"breed_relatives", "country", 1, "List breeds from the same country",
         {{"country", FieldKind::Echo},
          {"related_breeds", FieldKind::EntityList},
          {"regional_rank", FieldKind::Count},
          {"registry", FieldKind::Word}}},
        {"breed_coat_family", "coat_type", 2, "List breeds with a similar coat",
         {{"coat_type", FieldKind::Echo},
          {"breeds", FieldKind::EntityList},
          {"grooming_load", FieldKind::Count},
          {"sheds", FieldKind::YesNo}}},
        {"breed_facts", "breed_name", 0, "Get curated facts about the breed",
         {{"breed", FieldKind::Echo},
          {"fact_1", FieldKind::Phrase},
          {"fact_2", FieldKind::Phrase},
          {"fact_count", FieldKind::Count}}},
        {"breed_encyclopedia", "breed_name", 0, "Get the encyclopedia entry for the breed",
         {{"breed", FieldKind::Echo},
          {"description", FieldKind::Phrase},
          {"first_documented", FieldKind::Era},
          {"entry_count", FieldKind::Count}}}},
       "popularity_score", "popularity_tier", "beloved", "common", "rare",
       {{"breed_relatives", "regional_rank"},
        {"breed_coat_family", "grooming_load"},
        {"breed_facts", "fact_count"},
        {"breed_encyclopedia", "entry_count"}}},

      {"cocktail-menu-generator", "Food", "cocktail", "Cocktail Menu Generator",
       "cocktail_menu.json",
       {"Margarita", "Mojito", "Old Fashioned", "Martini", "Negroni", "Daiquiri", "Manhattan",
        "Cosmopolitan", "Whiskey Sour", "Mai Tai"},
       {{"search", "name", -1, "Search cocktail by name",
         {{"name", FieldKind::Echo},
          {"drink_id", FieldKind::IdNum},
          {"category", FieldKind::Word},
          {"glass", FieldKind::Word},
          {"main_ingredient", FieldKind::Word}}},
        {"details", "drink_id", 1, "Get the full recipe and instructions",
         {{"drink_id", FieldKind::Echo},
          {"instructions", FieldKind::Phrase},
          {"ingredients", FieldKind::WordList},
          {"ingredient_count", FieldKind::Count}}},
        {"by_ingredient", "ingredient", 4, "List cocktails using the main ingredient",
         {{"ingredient", FieldKind::Echo},
          {"cocktails", FieldKind::EntityList},
          {"usage_index", FieldKind::Count},
          {"flavor_note", FieldKind::Word}}},
        {"by_category", "category", 2, "List cocktails in the same category",
         {{"category", FieldKind::Echo},
          {"cocktails", FieldKind::EntityList},
          {"category_size", FieldKind::Count},
          {"trending", FieldKind::YesNo}}},
        {"by_glass", "glass", 3, "List cocktails served in the same glass",
         {{"glass", FieldKind::Echo},
          {"cocktails", FieldKind::EntityList},
          {"glass_popularity", FieldKind::Count},
          {"capacity_note", FieldKind::Word}}}},
       "complexity_score", "complexity_rating", "Complex", "Medium", "Easy",
       {{"details", "ingredient_count"},
        {"by_ingredient", "usage_index"},
        {"by_category", "category_size"},
        {"by_glass", "glass_popularity"}}},

      {"countries-encyclopedia", "Reference", "country", "Countries Encyclopedia",
       "country_encyclopedia.json",
       {"Japan", "Brazil", "Norway", "Kenya", "Canada", "Portugal", "Vietnam", "Iceland",
        "Morocco", "Chile"},
       {{"country_profile", "country_name", -1, "Get core country facts",
         {{"country", FieldKind::Echo},
          {"capital", FieldKind::Word},
          {"region", FieldKind::Word},
          {"languages", FieldKind::WordList},
          {"motto", FieldKind::Phrase}}},
        {"region_neighbors", "region", 2, "List countries in the same region",
         {{"region", FieldKind::Echo},
          {"countries", FieldKind::EntityList},
          {"member_count", FieldKind::Count},
          {"bloc", FieldKind::Word}}},
        {"capital_details", "capital", 1, "Get details about the capital city",
         {{"capital", FieldKind::Echo},
          {"landmarks", FieldKind::WordList},
          {"elevation_index", FieldKind::Count},
          {"founded", FieldKind::Era}}},
        {"currency_info", "country_name", 0, "Get currency information",
         {{"country", FieldKind::Echo},
          {"currency", FieldKind::Word},
          {"exchange_index", FieldKind::Count},
          {"symbol_note", FieldKind::Word}}},
        {"holiday_calendar", "country_name", 0, "List national holidays",
         {{"country", FieldKind::Echo},
          {"holidays", FieldKind::WordList},
          {"holiday_count", FieldKind::Count},
          {"season_note", FieldKind::Word}}}},
       "development_index", "development_band", "advanced", "emerging", "developing",
       {{"region_neighbors", "member_count"},
        {"capital_details", "elevation_index"},
        {"currency_info", "exchange_index"},
        {"holiday_calendar", "holiday_count"}}},

      {"dnd-campaign-builder", "Gaming", "character class", "D&D Campaign Builder",
       "dnd_campaign.json",
       {"wizard", "paladin", "ranger", "cleric", "rogue", "barbarian", "druid", "warlock",
        "bard", "monk"},
       {{"class_profile", "class_name", -1, "Get class basics",
         {{"class_name", FieldKind::Echo},
          {"primary_ability", FieldKind::Word},
          {"hit_die_range", FieldKind::RangeStr},
          {"saving_throws", FieldKind::WordList},
          {"role", FieldKind::Phrase}}},
        {"class_spells", "ability", 1, "List spells keyed to the primary ability",
         {{"ability", FieldKind::Echo},
          {"spells", FieldKind::WordList},
          {"spell_count", FieldKind::Count},
          {"school", FieldKind::Word}}},
        {"class_equipment", "class_name", 0, "List starting equipment",
         {{"class_name", FieldKind::Echo},
          {"items", FieldKind::WordList},
          {"item_count", FieldKind::Count},
          {"rarity", FieldKind::Word}}},
        {"class_features", "class_name", 0, "List class features",
         {{"class_name", FieldKind::Echo},
          {"features", FieldKind::WordList},
          {"feature_count", FieldKind::Count},
          {"signature", FieldKind::Phrase}}},
        {"class_subclasses", "class_name", 0, "List subclasses",
         {{"class_name", FieldKind::Echo},
          {"subclasses", FieldKind::EntityList},
          {"subclass_count", FieldKind::Count},
          {"archetype", FieldKind::Word}}},
        {"class_proficiencies", "class_name", 0, "List proficiencies",
         {{"class_name", FieldKind::Echo},
          {"proficiencies", FieldKind::WordList},
          {"proficiency_count", FieldKind::Count},
          {"focus", FieldKind::Word}}}},
       "versatility_score", "versatility_band", "versatile", "balanced", "narrow",
       {{"class_spells", "spell_count"},
        {"class_features", "feature_count"},
        {"class_subclasses", "subclass_count"},
        {"class_equipment", "item_count"}}},

      {"dnd-monster-compendium", "Gaming", "monster", "D&D Monster Compendium",
       "monster_compendium.json",
       {"goblin", "owlbear", "lich", "troll", "banshee", "kraken", "mimic", "basilisk",
        "wyvern", "ghoul"},
       {{"monster_profile", "monster_name", -1, "Get monster basics",
         {{"monster", FieldKind::Echo},
          {"habitat", FieldKind::Word},
          {"size_class", FieldKind::Word},
          {"challenge_range", FieldKind::RangeStr},
          {"lore", FieldKind::Phrase}}},
        {"monster_abilities", "monster_name", 0, "List monster abilities",
         {{"monster", FieldKind::Echo},
          {"abilities", FieldKind::WordList},
          {"ability_count", FieldKind::Count},
          {"signature", FieldKind::Word}}},
        {"monster_loot", "monster_name", 0, "List loot drops",
         {{"monster", FieldKind::Echo},
          {"drops", FieldKind::WordList},
          {"drop_count", FieldKind::Count},
          {"rarity", FieldKind::Word}}},
        {"habitat_dwellers", "habitat", 1, "List monsters sharing the habitat",
         {{"habitat", FieldKind::Echo},
          {"monsters", FieldKind::EntityList},
          {"dweller_count", FieldKind::Count},
          {"terrain", FieldKind::Word}}},
        {"monster_weaknesses", "monster_name", 0, "List weaknesses",
         {{"monster", FieldKind::Echo},
          {"weaknesses", FieldKind::WordList},
          {"weakness_count", FieldKind::Count},
          {"resistance", FieldKind::Word}}},
        {"monster_tactics", "monster_name", 0, "Describe combat tactics",
         {{"monster", FieldKind::Echo},
          {"tactics", FieldKind::WordList},
          {"tactic_count", FieldKind::Count},
          {"behavior", FieldKind::Phrase}}}},
       "threat_score", "threat_band", "deadly", "dangerous", "minor",
       {{"monster_abilities", "ability_count"},
        {"habitat_dwellers", "dweller_count"},
        {"monster_weaknesses", "weakness_count"},
        {"monster_loot", "drop_count"}}},

      {"dog-breeds-encyclopedia", "Reference", "dog breed", "Dog Breeds Encyclopedia",
       "dog_encyclopedia.json",
       {"Labrador", "Husky", "Beagle", "Corgi", "Dalmatian", "Boxer", "Poodle", "Samoyed",
        "Terrier", "Shepherd"},
       {{"dog_profile", "breed_name", -1, "Get breed basics",
         {{"breed", FieldKind::Echo},
          {"group", FieldKind::Word},
          {"origin", FieldKind::CountryName},
          {"size_class", FieldKind::Word},
          {"temperament", FieldKind::Phrase}}},
        {"group_members", "group", 1, "List breeds in the same group",
         {{"group", FieldKind::Echo},
          {"breeds", FieldKind::EntityList},
          {"member_count", FieldKind::Count},
          {"purpose", FieldKind::Word}}},
        {"origin_breeds", "country", 2, "List breeds from the same country",
         {{"country", FieldKind::Echo},
          {"breeds", FieldKind::EntityList},
          {"national_rank", FieldKind::Count},
          {"climate", FieldKind::Word}}},
        {"dog_images", "breed_name", 0, "List image albums",
         {{"breed", FieldKind::Echo},
          {"albums", FieldKind::WordList},
          {"image_count", FieldKind::Count},
          {"style", FieldKind::Word}}},
        {"dog_training", "breed_name", 0, "Get training guidance",
         {{"breed", FieldKind::Echo},
          {"drills", FieldKind::WordList},
          {"trainability", FieldKind::Count},
          {"difficulty", FieldKind::Word}}}},
       "companionship_score", "companionship_band", "devoted", "friendly", "independent",
       {{"group_members", "member_count"},
        {"origin_breeds", "national_rank"},
        {"dog_training", "trainability"},
        {"dog_images", "image_count"}}},

      {"gitlab-deep-analysis", "Developer", "repository", "GitLab Deep Analysis",
       "gitlab_analysis_results.json",
       {"gitlab-runner", "gitaly", "gitlab-pages", "gitlab-shell", "cli", "gitlab-workhorse",
        "omnibus-gitlab", "gitlab-vscode-extension", "gitlab-development-kit", "gitlab-qa"},
       {{"get_project_info", "project_path", -1, "Get project details (stars, forks, description)",
         {{"project_path", FieldKind::Echo},
          {"project_id", FieldKind::IdNum},
          {"description", FieldKind::Phrase},
          {"stars", FieldKind::Count},
          {"forks", FieldKind::Count}}},
        {"get_contributors", "project_id", 1, "Get the contributor list",
         {{"project_id", FieldKind::Echo},
          {"top_contributors", FieldKind::PeopleList},
          {"contributor_count", FieldKind::Count},
          {"lead_maintainer", FieldKind::PersonName}}},
        {"get_commits", "project_id", 1, "Get recent commit history",
         {{"project_id", FieldKind::Echo},
          {"recent_commit_titles", FieldKind::WordList},
          {"commit_count", FieldKind::Count},
          {"last_author", FieldKind::PersonName}}},
        {"get_branches", "project_id", 1, "Get branch information",
         {{"project_id", FieldKind::Echo},
          {"branches", FieldKind::WordList},
          {"branch_count", FieldKind::Count},
          {"default_protected", FieldKind::YesNo}}},
        {"get_issues", "project_id", 1, "Get the issue list",
         {{"project_id", FieldKind::Echo},
          {"recent_issue_titles", FieldKind::WordList},
          {"open_issue_count", FieldKind::Count},
          {"triage_state", FieldKind::Word}}},
        {"get_merge_requests", "project_id", 1, "Get open merge requests",
         {{"project_id", FieldKind::Echo},
          {"open_merge_requests", FieldKind::WordList},
          {"merge_request_count", FieldKind::Count},
          {"review_state", FieldKind::Word}}}},
       "activity_score", "health_status", "healthy", "moderate", "inactive",
       {{"get_commits", "commit_count"},
        {"get_contributors", "contributor_count"},
        {"get_issues", "open_issue_count"},
        {"get_branches", "branch_count"}}},

      {"jikan-anime-analysis", "Entertainment", "anime series", "Jikan Anime Analysis",
       "anime_analysis.json",
       {"Fullmetal Alchemist", "Cowboy Bebop", "Attack on Titan", "Death Note", "One Piece",
        "Naruto", "Spirited Away", "Akira", "Evangelion", "Trigun"},
       {{"anime_profile", "title", -1, "Get series basics",
         {{"title", FieldKind::Echo},
          {"studio", FieldKind::Word},
          {"genre", FieldKind::Word},
          {"episode_range", FieldKind::RangeStr},
          {"synopsis", FieldKind::Phrase}}},
        {"studio_catalog", "studio", 1, "List productions by the same studio",
         {{"studio", FieldKind::Echo},
          {"productions", FieldKind::EntityList},
          {"production_count", FieldKind::Count},
          {"founded", FieldKind::Era}}},
        {"genre_chart", "genre", 2, "List chart titles in the genre",
         {{"genre", FieldKind::Echo},
          {"titles", FieldKind::EntityList},
          {"chart_size", FieldKind::Count},
          {"trending", FieldKind::YesNo}}},
        {"anime_characters", "title", 0, "List main characters",
         {{"title", FieldKind::Echo},
          {"main_characters", FieldKind::PeopleList},
          {"character_count", FieldKind::Count},
          {"protagonist", FieldKind::PersonName}}},
        {"anime_ratings", "title", 0, "Get rating summary",
         {{"title", FieldKind::Echo},
          {"review_sources", FieldKind::WordList},
          {"score_index", FieldKind::Count},
          {"consensus", FieldKind::Phrase}}}},
       "acclaim_score", "acclaim_band", "classic", "popular", "niche",
       {{"anime_ratings", "score_index"},
        {"anime_characters", "character_count"},
        {"genre_chart", "chart_size"},
        {"studio_catalog", "production_count"}}},

      {"jsonplaceholder-analyzer", "Developer", "user account", "JSONPlaceholder Analyzer",
       "user_activity_report.json",
       {"Bret", "Antonette", "Samantha", "Karianne", "Kamren", "Leopoldo", "Elwyn", "Maxime",
        "Delphine", "Moriah"},
       {{"get_user", "username", -1, "Get the user record",
         {{"username", FieldKind::Echo},
          {"user_id", FieldKind::IdNum},
          {"company", FieldKind::Word},
          {"city", FieldKind::Word},
          {"catch_phrase", FieldKind::Phrase}}},
        {"get_posts", "user_id", 1, "List the user's posts",
         {{"user_id", FieldKind::Echo},
          {"post_titles", FieldKind::WordList},
          {"post_count", FieldKind::Count},
          {"top_topic", FieldKind::Word}}},
        {"get_comments", "user_id", 1, "List recent comments",
         {{"user_id", FieldKind::Echo},
          {"recent_comments", FieldKind::WordList},
          {"comment_count", FieldKind::Count},
          {"sentiment", FieldKind::Word}}},
        {"get_todos", "user_id", 1, "List open todos",
         {{"user_id", FieldKind::Echo},
          {"open_todos", FieldKind::WordList},
          {"todo_count", FieldKind::Count},
          {"urgency", FieldKind::Word}}},
        {"get_albums", "user_id", 1, "List photo albums",
         {{"user_id", FieldKind::Echo},
          {"album_titles", FieldKind::WordList},
          {"album_count", FieldKind::Count},
          {"cover_theme", FieldKind::Word}}},
        {"get_photos", "user_id", 1, "List photo tags",
         {{"user_id", FieldKind::Echo},
          {"photo_tags", FieldKind::WordList},
          {"photo_count", FieldKind::Count},
          {"palette", FieldKind::Word}}},
        {"get_followers", "user_id", 1, "List followers",
         {{"user_id", FieldKind::Echo},
          {"followers", FieldKind::PeopleList},
          {"follower_count", FieldKind::Count},
          {"most_active", FieldKind::PersonName}}}},
       "engagement_score", "engagement_band", "prolific", "active", "dormant",
       {{"get_posts", "post_count"},
        {"get_comments", "comment_count"},
        {"get_todos", "todo_count"},
        {"get_albums", "album_count"}}},

      {"local-dna-analysis", "Science", "gene", "Local DNA Analysis",
       "dna_analysis_report.json",
       {"BRCA1", "TP53", "EGFR", "MYC", "KRAS", "PTEN", "BRAF", "ALK", "NOTCH1", "RB1"},
       {{"gene_profile", "gene_symbol", -1, "Get gene annotation",
         {{"gene", FieldKind::Echo},
          {"chromosome", FieldKind::Word},
          {"pathway", FieldKind::Word},
          {"sequence_window", FieldKind::RangeStr},
          {"annotation", FieldKind::Phrase}}},
        {"pathway_genes", "pathway", 2, "List genes in the same pathway",
         {{"pathway", FieldKind::Echo},
          {"genes", FieldKind::EntityList},
          {"pathway_size", FieldKind::Count},
          {"regulation", FieldKind::Word}}},
        {"gene_variants", "gene_symbol", 0, "List known variants",
         {{"gene", FieldKind::Echo},
          {"variant_ids", FieldKind::WordList},
          {"variant_count", FieldKind::Count},
          {"hotspot", FieldKind::YesNo}}},
        {"gene_expression", "gene_symbol", 0, "Get expression profile",
         {{"gene", FieldKind::Echo},
          {"tissues", FieldKind::WordList},
          {"expression_index", FieldKind::Count},
          {"peak_tissue", FieldKind::Word}}},
        {"gene_homologs", "gene_symbol", 0, "List homologous genes",
         {{"gene", FieldKind::Echo},
          {"homologs", FieldKind::WordList},
          {"homolog_count", FieldKind::Count},
          {"conservation", FieldKind::Word}}}},
       "research_score", "research_band", "hot", "studied", "obscure",
       {{"gene_variants", "variant_count"},
        {"gene_expression", "expression_index"},
        {"gene_homologs", "homolog_count"},
        {"pathway_genes", "pathway_size"}}},

      {"name-demographics", "Society", "given name", "Name Demographics",
       "name_demographics.json",
       {"Alex", "Maria", "Chen", "Fatima", "Olga", "Kenji", "Priya", "Lucas", "Amara", "Soren"},
       {{"name_profile", "name", -1, "Get name basics",
         {{"name", FieldKind::Echo},
          {"likely_region", FieldKind::CountryName},
          {"style", FieldKind::Word},
          {"name_day_era", FieldKind::Era},
          {"meaning", FieldKind::Phrase}}},
        {"region_names", "region", 1, "List common names in the region",
         {{"region", FieldKind::Echo},
          {"common_names", FieldKind::PeopleList},
          {"sample_size", FieldKind::Count},
          {"source", FieldKind::Word}}},
        {"name_popularity", "name", 0, "Get the popularity curve",
         {{"name", FieldKind::Echo},
          {"decades", FieldKind::WordList},
          {"popularity_index", FieldKind::Count},
          {"peak_era", FieldKind::Era}}},
        {"name_variants", "name", 0, "List spelling variants",
         {{"name", FieldKind::Echo},
          {"variants", FieldKind::PeopleList},
          {"variant_count", FieldKind::Count},
          {"script_note", FieldKind::Word}}},
        {"name_famous", "name", 0, "List notable bearers",
         {{"name", FieldKind::Echo},
          {"notable_people", FieldKind::PeopleList},
          {"notable_count", FieldKind::Count},
          {"field", FieldKind::Word}}}},
       "prevalence_score", "prevalence_band", "widespread", "familiar", "rare",
       {{"name_popularity", "popularity_index"},
        {"name_famous", "notable_count"},
        {"name_variants", "variant_count"},
        {"region_names", "sample_size"}}},

      {"open-meteo-weather", "Science", "city", "Open-Meteo Weather",
       "weather_report.json",
       {"Berlin", "Tokyo", "Nairobi", "Reykjavik", "Sydney", "Lima", "Toronto", "Mumbai",
        "Oslo", "Cairo"},
       {{"current_conditions", "city", -1, "Get current conditions",
         {{"city", FieldKind::Echo},
          {"climate_zone", FieldKind::Word},
          {"station_id", FieldKind::IdNum},
          {"temp_range", FieldKind::RangeStr},
          {"sky_summary", FieldKind::Phrase}}},
        {"zone_profile", "climate_zone", 1, "Describe the climate zone",
         {{"climate_zone", FieldKind::Echo},
          {"reference_cities", FieldKind::EntityList},
          {"zone_span", FieldKind::Count},
          {"koppen_note", FieldKind::Word}}},
        {"station_history", "station_id", 2, "Get station records",
         {{"station_id", FieldKind::Echo},
          {"record_years", FieldKind::WordList},
          {"record_count", FieldKind::Count},
          {"oldest_record", FieldKind::Era}}},
        {"forecast_digest", "city", 0, "Get the forecast digest",
         {{"city", FieldKind::Echo},
          {"outlook_days", FieldKind::WordList},
          {"confidence_index", FieldKind::Count},
          {"front_note", FieldKind::Word}}},
        {"air_quality", "city", 0, "Get air-quality data",
         {{"city", FieldKind::Echo},
          {"pollutants", FieldKind::WordList},
          {"aqi_index", FieldKind::Count},
          {"advisory", FieldKind::Word}}}},
       "stability_score", "stability_band", "stable", "variable", "volatile",
       {{"forecast_digest", "confidence_index"},
        {"air_quality", "aqi_index"},
        {"station_history", "record_count"},
        {"zone_profile", "zone_span"}}},

      {"pokeapi-pokedex", "Gaming", "pokemon", "PokeAPI Pokedex",
       "pokedex_report.json",
       {"pikachu", "charizard", "bulbasaur", "squirtle", "eevee", "gengar", "snorlax",
        "dragonite", "lucario", "greninja"},
       {{"pokemon_profile", "name", -1, "Get pokedex basics",
         {{"name", FieldKind::Echo},
          {"primary_type", FieldKind::Word},
          {"habitat", FieldKind::Word},
          {"level_range", FieldKind::RangeStr},
          {"pokedex_entry", FieldKind::Phrase}}},
        {"type_chart", "type_name", 1, "List members of the type",
         {{"type_name", FieldKind::Echo},
          {"members", FieldKind::EntityList},
          {"member_count", FieldKind::Count},
          {"strong_against", FieldKind::Word}}},
        {"habitat_species", "habitat", 2, "List species sharing the habitat",
         {{"habitat", FieldKind::Echo},
          {"species", FieldKind::EntityList},
          {"species_count", FieldKind::Count},
          {"terrain", FieldKind::Word}}},
        {"pokemon_moves", "name", 0, "List signature moves",
         {{"name", FieldKind::Echo},
          {"signature_moves", FieldKind::WordList},
          {"move_count", FieldKind::Count},
          {"strongest", FieldKind::Word}}},
        {"pokemon_evolutions", "name", 0, "Get the evolution chain",
         {{"name", FieldKind::Echo},
          {"evolution_chain", FieldKind::EntityList},
          {"stage_count", FieldKind::Count},
          {"trigger", FieldKind::Word}}}},
       "battle_score", "battle_band", "ace", "solid", "support",
       {{"pokemon_moves", "move_count"},
        {"type_chart", "member_count"},
        {"pokemon_evolutions", "stage_count"},
        {"habitat_species", "species_count"}}},

      {"random-user-database", "Society", "nationality", "Random User Database",
       "user_database_report.json",
       {"US", "FR", "DE", "BR", "JP", "AU", "CH", "NL", "ES", "NO"},
       {{"nationality_profile", "code", -1, "Get nationality metadata",
         {{"code", FieldKind::Echo},
          {"locale", FieldKind::Word},
          {"registry_id", FieldKind::IdNum},
          {"age_span", FieldKind::RangeStr},
          {"demographic_note", FieldKind::Phrase}}},
        {"sample_users", "registry_id", 2, "Sample generated users",
         {{"registry_id", FieldKind::Echo},
          {"users", FieldKind::PeopleList},
          {"sample_count", FieldKind::Count},
          {"seed_note", FieldKind::Word}}},
        {"locale_formats", "locale", 1, "Get locale formats",
         {{"locale", FieldKind::Echo},
          {"formats", FieldKind::WordList},
          {"format_count", FieldKind::Count},
          {"phone_style", FieldKind::Word}}},
        {"nationality_surnames", "code", 0, "List common surnames",
         {{"code", FieldKind::Echo},
          {"surnames", FieldKind::PeopleList},
          {"surname_count", FieldKind::Count},
          {"most_common", FieldKind::PersonName}}},
        {"nationality_cities", "code", 0, "List frequent cities",
         {{"code", FieldKind::Echo},
          {"cities", FieldKind::WordList},
          {"city_count", FieldKind::Count},
          {"largest", FieldKind::Word}}}},
       "coverage_score", "coverage_band", "broad", "partial", "sparse",
       {{"sample_users", "sample_count"},
        {"nationality_surnames", "surname_count"},
        {"nationality_cities", "city_count"},
        {"locale_formats", "format_count"}}},

      {"recipe-cookbook-builder", "Food", "recipe", "Recipe Cookbook Builder",
       "cookbook.json",
       {"Arrabiata", "Carbonara", "Wellington", "Pad Thai", "Ratatouille", "Moussaka",
        "Paella", "Goulash", "Tagine", "Pierogi"},
       {{"recipe_profile", "name", -1, "Get recipe basics",
         {{"name", FieldKind::Echo},
          {"cuisine", FieldKind::Word},
          {"main_ingredient", FieldKind::Word},
          {"prep_range", FieldKind::RangeStr},
          {"summary", FieldKind::Phrase}}},
        {"cuisine_recipes", "cuisine", 1, "List recipes from the same cuisine",
         {{"cuisine", FieldKind::Echo},
          {"recipes", FieldKind::EntityList},
          {"recipe_count", FieldKind::Count},
          {"region", FieldKind::Word}}},
        {"ingredient_uses", "ingredient", 2, "List dishes using the ingredient",
         {{"ingredient", FieldKind::Echo},
          {"dishes", FieldKind::EntityList},
          {"usage_count", FieldKind::Count},
          {"season", FieldKind::Word}}},
        {"recipe_steps", "name", 0, "List preparation steps",
         {{"name", FieldKind::Echo},
          {"steps", FieldKind::WordList},
          {"step_count", FieldKind::Count},
          {"technique", FieldKind::Word}}},
        {"recipe_nutrition", "name", 0, "Get nutrition facts",
         {{"name", FieldKind::Echo},
          {"macros", FieldKind::WordList},
          {"calorie_index", FieldKind::Count},
          {"diet_note", FieldKind::Word}}},
        {"recipe_pairings", "name", 0, "List pairings",
         {{"name", FieldKind::Echo},
          {"pairings", FieldKind::WordList},
          {"pairing_count", FieldKind::Count},
          {"highlight", FieldKind::Word}}}},
       "effort_score", "effort_band", "elaborate", "moderate", "simple",
       {{"recipe_steps", "step_count"},
        {"recipe_nutrition", "calorie_index"},
        {"ingredient_uses", "usage_count"},
        {"cuisine_recipes", "recipe_count"}}},

      {"rick-and-morty-explorer", "Entertainment", "character", "Rick & Morty Explorer",
       "character_explorer.json",
       {"Rick Sanchez", "Morty Smith", "Summer Smith", "Beth Smith", "Jerry Smith",
        "Birdperson", "Squanchy", "Mr. Poopybutthole", "Abradolf Lincler", "Mr. Meeseeks"},
       {{"character_profile", "name", -1, "Get character basics",
         {{"name", FieldKind::Echo},
          {"species", FieldKind::Word},
          {"home_dimension", FieldKind::Word},
          {"episode_range", FieldKind::RangeStr},
          {"bio", FieldKind::Phrase}}},
        {"dimension_residents", "dimension", 2, "List residents of the dimension",
         {{"dimension", FieldKind::Echo},
          {"residents", FieldKind::EntityList},
          {"resident_count", FieldKind::Count},
          {"anomaly", FieldKind::Word}}},
        {"species_catalog", "species", 1, "List members of the species",
         {{"species", FieldKind::Echo},
          {"members", FieldKind::EntityList},
          {"member_count", FieldKind::Count},
          {"trait", FieldKind::Word}}},
        {"character_episodes", "name", 0, "List appearances",
         {{"name", FieldKind::Echo},
          {"episode_titles", FieldKind::WordList},
          {"appearance_count", FieldKind::Count},
          {"debut", FieldKind::Era}}},
        {"character_gadgets", "name", 0, "List gadgets",
         {{"name", FieldKind::Echo},
          {"gadgets", FieldKind::WordList},
          {"gadget_count", FieldKind::Count},
          {"signature", FieldKind::Word}}}},
       "chaos_score", "chaos_band", "unhinged", "eccentric", "mundane",
       {{"character_episodes", "appearance_count"},
        {"character_gadgets", "gadget_count"},
        {"dimension_residents", "resident_count"},
        {"species_catalog", "member_count"}}},

      {"tvmaze-series-analyzer", "Developer", "series", "TVMaze Series Analyzer",
       "series_analysis.json",
       {"Breaking Bad", "The Wire", "Sherlock", "Westworld", "Fargo", "True Detective",
        "Dark", "Chernobyl", "Severance", "Succession"},
       {{"series_profile", "title", -1, "Get series basics",
         {{"title", FieldKind::Echo},
          {"network", FieldKind::Word},
          {"genre", FieldKind::Word},
          {"season_range", FieldKind::RangeStr},
          {"premise", FieldKind::Phrase}}},
        {"network_lineup", "network", 1, "List shows on the same network",
         {{"network", FieldKind::Echo},
          {"shows", FieldKind::EntityList},
          {"lineup_size", FieldKind::Count},
          {"flagship", FieldKind::Word}}},
        {"genre_shows", "genre", 2, "List shows in the genre",
         {{"genre", FieldKind::Echo},
          {"titles", FieldKind::EntityList},
          {"genre_size", FieldKind::Count},
          {"mood", FieldKind::Word}}},
        {"series_episodes", "title", 0, "List notable episodes",
         {{"title", FieldKind::Echo},
          {"notable_episodes", FieldKind::WordList},
          {"episode_count", FieldKind::Count},
          {"finale_note", FieldKind::Word}}},
        {"series_cast", "title", 0, "List the principal cast",
         {{"title", FieldKind::Echo},
          {"leads", FieldKind::PeopleList},
          {"cast_count", FieldKind::Count},
          {"showrunner", FieldKind::PersonName}}}},
       "bingeability_score", "bingeability_band", "gripping", "watchable", "slow",
       {{"series_episodes", "episode_count"},
        {"series_cast", "cast_count"},
        {"genre_shows", "genre_size"},
        {"network_lineup", "lineup_size"}}},

      {"university-directory", "Education", "university", "University Directory",
       "university_directory.json",
       {"Oxford", "Cambridge", "Stanford", "Kyoto University", "ETH Zurich", "Sorbonne",
        "MIT", "Heidelberg", "Uppsala", "Bologna"},
       {{"university_profile", "name", -1, "Get university basics",
         {{"name", FieldKind::Echo},
          {"country", FieldKind::CountryName},
          {"city", FieldKind::Word},
          {"founded_era", FieldKind::Era},
          {"charter_note", FieldKind::Phrase}}},
        {"country_universities", "country", 1, "List universities in the country",
         {{"country", FieldKind::Echo},
          {"universities", FieldKind::EntityList},
          {"directory_count", FieldKind::Count},
          {"oldest", FieldKind::Word}}},
        {"university_faculties", "name", 0, "List faculties",
         {{"name", FieldKind::Echo},
          {"faculties", FieldKind::WordList},
          {"faculty_count", FieldKind::Count},
          {"renowned", FieldKind::Word}}},
        {"university_programs", "name", 0, "List programs",
         {{"name", FieldKind::Echo},
          {"programs", FieldKind::WordList},
          {"program_count", FieldKind::Count},
          {"flagship", FieldKind::Word}}},
        {"university_campuses", "name", 0, "List campuses",
         {{"name", FieldKind::Echo},
          {"campuses", FieldKind::WordList},
          {"campus_count", FieldKind::Count},
          {"main_site", FieldKind::Word}}}},
       "breadth_score", "breadth_band", "comprehensive", "focused", "specialized",
       {{"university_programs", "program_count"},
        {"university_faculties", "faculty_count"},
        {"university_campuses", "campus_count"},
        {"country_universities", "directory_count"}}},

      {"usgs-earthquake-monitor", "Science", "region", "USGS Earthquake Monitor",
       "earthquake_report.json",
       {"California", "Alaska", "Japan Trench", "Chile Coast", "Indonesia", "Anatolia",
        "Nepal Himalaya", "Cascadia", "Iceland Rift", "Aegean"},
       {{"region_summary", "region", -1, "Get the seismic summary",
         {{"region", FieldKind::Echo},
          {"plate", FieldKind::Word},
          {"grid_id", FieldKind::IdNum},
          {"magnitude_range", FieldKind::RangeStr},
          {"hazard_note", FieldKind::Phrase}}},
        {"plate_activity", "plate", 1, "Describe plate activity",
         {{"plate", FieldKind::Echo},
          {"boundary_regions", FieldKind::EntityList},
          {"boundary_count", FieldKind::Count},
          {"drift_note", FieldKind::Word}}},
        {"grid_events", "grid_id", 2, "List events in the monitoring grid",
         {{"grid_id", FieldKind::Echo},
          {"event_ids", FieldKind::WordList},
          {"event_count", FieldKind::Count},
          {"deepest", FieldKind::Word}}},
        {"recent_quakes", "region", 0, "List recent quakes",
         {{"region", FieldKind::Echo},
          {"recent_magnitudes", FieldKind::WordList},
          {"quake_count", FieldKind::Count},
          {"strongest", FieldKind::Word}}},
        {"aftershock_forecast", "region", 0, "Get the aftershock forecast",
         {{"region", FieldKind::Echo},
          {"windows", FieldKind::WordList},
          {"probability_index", FieldKind::Count},
          {"advisory", FieldKind::Word}}},
        {"station_network", "region", 0, "Describe the station network",
         {{"region", FieldKind::Echo},
          {"stations", FieldKind::WordList},
          {"station_count", FieldKind::Count},
          {"coverage", FieldKind::Word}}}},
       "seismicity_score", "seismicity_band", "critical", "elevated", "quiet",
       {{"recent_quakes", "quake_count"},
        {"grid_events", "event_count"},
        {"aftershock_forecast", "probability_index"},
        {"plate_activity", "boundary_count"}}},

      {"vocabulary-builder", "Reference", "word", "Vocabulary Builder",
       "vocabulary_report.json",
       {"serendipity", "ephemeral", "ubiquitous", "paradigm", "resilience", "eloquent",
        "pragmatic", "altruism", "luminous", "zephyr"},
       {{"word_profile", "word", -1, "Get the word profile",
         {{"word", FieldKind::Echo},
          {"part_of_speech", FieldKind::Word},
          {"root_language", FieldKind::Word},
          {"first_use", FieldKind::Era},
          {"definition", FieldKind::Phrase}}},
        {"language_words", "language", 2, "List loanwords from the root language",
         {{"language", FieldKind::Echo},
          {"loanwords", FieldKind::WordList},
          {"loan_count", FieldKind::Count},
          {"family", FieldKind::Word}}},
        {"word_synonyms", "word", 0, "List synonyms",
         {{"word", FieldKind::Echo},
          {"synonyms", FieldKind::WordList},
          {"synonym_count", FieldKind::Count},
          {"closest", FieldKind::Word}}},
        {"word_usage", "word", 0, "Get usage statistics",
         {{"word", FieldKind::Echo},
          {"example_contexts", FieldKind::WordList},
          {"frequency_index", FieldKind::Count},
          {"register", FieldKind::Word}}},
        {"word_etymology", "word", 0, "Trace the etymology",
         {{"word", FieldKind::Echo},
          {"derivations", FieldKind::WordList},
          {"derivation_count", FieldKind::Count},
          {"evolution_note", FieldKind::Phrase}}}},
       "mastery_score", "mastery_band", "essential", "useful", "exotic",
       {{"word_usage", "frequency_index"},
        {"word_synonyms", "synonym_count"},
        {"word_etymology", "derivation_count"},
        {"language_words", "loan_count"}}},

      {"world-bank-snapshot", "Education", "economy", "World Bank Snapshot",
       "worldbank_snapshot.json",
       {"Germany", "India", "Brazil", "Nigeria", "Indonesia", "Mexico", "Poland", "Egypt",
        "Thailand", "Peru"},
       {{"economy_profile", "country", -1, "Get the economy profile",
         {{"country", FieldKind::Echo},
          {"income_group", FieldKind::Word},
          {"region_code", FieldKind::Word},
          {"reporting_years", FieldKind::RangeStr},
          {"overview", FieldKind::Phrase}}},
        {"income_group_members", "group", 1, "List economies in the income group",
         {{"group", FieldKind::Echo},
          {"economies", FieldKind::EntityList},
          {"group_size", FieldKind::Count},
          {"threshold_note", FieldKind::Word}}},
        {"region_indicators", "region_code", 2, "List regional indicators",
         {{"region_code", FieldKind::Echo},
          {"indicators", FieldKind::WordList},
          {"indicator_count", FieldKind::Count},
          {"lead_indicator", FieldKind::Word}}},
        {"economy_timeseries", "country", 0, "List timeseries",
         {{"country", FieldKind::Echo},
          {"series_ids", FieldKind::WordList},
          {"series_count", FieldKind::Count},
          {"latest_year", FieldKind::Era}}},
        {"economy_projects", "country", 0, "List active projects",
         {{"country", FieldKind::Echo},
          {"projects", FieldKind::WordList},
          {"project_count", FieldKind::Count},
          {"sector", FieldKind::Word}}}},
       "momentum_score", "momentum_band", "surging", "steady", "lagging",
       {{"economy_timeseries", "series_count"},
        {"economy_projects", "project_count"},
        {"region_indicators", "indicator_count"},
        {"income_group_members", "group_size"}}},
  };
  return defs;
}

inline const FamilyDef* find_family(std::string_view id) {
  for (const auto& f : families())
    if (id == f.id) return &f;
  return nullptr;
}

inline std::vector<std::string> family_ids() {
  std::vector<std::string> ids;
  for (const auto& f : families()) ids.push_back(f.id);
  return ids;
}

inline const ToolDef* find_tool(const FamilyDef& fam, std::string_view name) {
  for (const auto& t : fam.tools)
    if (name == t.name) return &t;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Field generation pools

namespace pools {

inline const std::vector<const char*>& countries() {
  static const std::vector<const char*> p = {
      "Persia",  "Thailand", "Norway",  "Egypt",   "Scotland", "Turkey", "Japan",
      "France",  "Russia",   "Brazil",  "Canada",  "Ethiopia", "Wales",  "Burma",
      "Somalia", "Cyprus",   "Malta",   "Iceland", "Mexico",   "Kenya"};
  return p;
}

inline const std::vector<const char*>& people() {
  static const std::vector<const char*> p = {
      "Ada Riley",    "Marco Jensen", "Yuki Tanaka",  "Elena Petrova", "Samir Haddad",
      "Ingrid Holm",  "Tomas Varga",  "Amara Diallo", "Felix Braun",   "Nadia Kova",
      "Owen Clarke",  "Lucia Romero", "Kenji Sato",   "Petra Novak",   "Dario Conti",
      "Maja Lindberg"};
  return p;
}

inline const std::vector<const char*>& adjectives() {
  static const std::vector<const char*> p = {
      "silky",   "sturdy",  "gentle",  "vivid",   "rugged", "quiet",   "bright",
      "dense",   "smooth",  "brisk",   "mellow",  "crisp",  "steady",  "bold",
      "subtle",  "layered", "compact", "weathered"};
  return p;
}

inline const std::vector<const char*>& words() {
  static const std::vector<const char*> p = {
      "amber",   "juniper", "citrus",  "maple",   "ginger",  "mint",    "cobalt",
      "willow",  "summit",  "harbor",  "meadow",  "prairie", "granite", "cedar",
      "saffron", "indigo",  "basalt",  "orchid",  "tundra",  "lagoon",  "ember",
      "quartz",  "sierra",  "delta"};
  return p;
}

inline const std::vector<const char*>& eras() {
  static const std::vector<const char*> p = {
      "1820s", "1850s", "1880s", "1900s", "1920s", "1940s", "1960s", "1980s", "1990s", "2010s"};
  return p;
}

inline constexpr const char* kFillerText =
    "Upstream service emitted this extended diagnostic context block for compatibility with "
    "legacy consumers; it repeats cache headers, pagination hints, locale annotations and "
    "attribution notices that downstream analysis does not need. ";

}  // namespace pools

// ---------------------------------------------------------------------------
// Payload generation

namespace detail {

inline Value pick(prf::Stream& rng, const std::vector<const char*>& pool) {
  return Value(pool[rng.below(pool.size())]);
}

// Always three distinct items: fixed-shape payloads keep the per-entity leaf
// count uniform, which the proportional scoring rule relies on.
inline Value pick_list(prf::Stream& rng, const std::vector<const char*>& pool) {
  std::vector<std::size_t> idx;
  Value::List out;
  while (out.size() < 3 && idx.size() < pool.size()) {
    std::size_t i = rng.below(pool.size());
    if (std::find(idx.begin(), idx.end(), i) != idx.end()) continue;
    idx.push_back(i);
    out.push_back(Value(pool[i]));
  }
  return Value(std::move(out));
}

inline Value entity_list(prf::Stream& rng, const FamilyDef& fam) {
  std::vector<const char*> pool(fam.entities.begin(), fam.entities.end());
  return pick_list(rng, pool);
}

inline Value phrase(prf::Stream& rng) {
  const auto& adj = pools::adjectives();
  const auto& w = pools::words();
  std::string a1 = adj[rng.below(adj.size())];
  std::string n1 = w[rng.below(w.size())];
  std::string a2 = adj[rng.below(adj.size())];
  std::string n2 = w[rng.below(w.size())];
  a1[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(a1[0])));
  return Value(a1 + " " + n1 + " profile with " + a2 + " " + n2 + " notes.");
}

inline Value field_value(FieldKind kind, prf::Stream& rng, const FamilyDef& fam,
                         const Value& arg) {
  switch (kind) {
    case FieldKind::Echo: return arg;
    case FieldKind::CountryName: return pick(rng, pools::countries());
    case FieldKind::PersonName: return pick(rng, pools::people());
    case FieldKind::Word: return pick(rng, pools::words());
    case FieldKind::Adjective: return pick(rng, pools::adjectives());
    case FieldKind::Phrase: return phrase(rng);
    case FieldKind::Era: return pick(rng, pools::eras());
    case FieldKind::YesNo: return Value(rng.below(2) == 0 ? "yes" : "no");
    case FieldKind::IdNum: return Value(std::to_string(10000 + rng.below(90000)));
    case FieldKind::Count: return Value(static_cast<double>(rng.below(101)));
    case FieldKind::RangeStr: {
      long long lo = 2 + static_cast<long long>(rng.below(18));
      long long hi = lo + 2 + static_cast<long long>(rng.below(12));
      return Value(std::to_string(lo) + "-" + std::to_string(hi));
    }
    case FieldKind::EntityList: return entity_list(rng, fam);
    case FieldKind::PeopleList: return pick_list(rng, pools::people());
    case FieldKind::WordList: return pick_list(rng, pools::words());
  }
  return Value();
}

}  // namespace detail

// Oracle-relevant fields of one tool response. Degraded (all-null) when the
// entity is a configured edge case for the profile tool, or when the argument
// itself is null (a lookup keyed by a missing value finds nothing).
inline Record oracle_fields(const FamilyDef& fam, const ToolDef& tool, const Value& arg,
                            std::uint64_t seed, bool edge_entity) {
  Record out;
  bool degraded = edge_entity || arg.is_null();
  if (degraded) {
    for (const auto& f : tool.fields) out.set(f.name, Value());
    return out;
  }
  Record args;
  args.set(tool.param, arg);
  prf::Stream rng{prf::key(seed, fam.id, tool.name, canonical_args(args))};
  for (const auto& f : tool.fields) out.set(f.name, detail::field_value(f.kind, rng, fam, arg));
  return out;
}

// Full response: oracle fields plus a verbose filler field sized at 4x the
// serialized oracle bytes, so raw payloads dwarf what a task actually needs.
inline Value tool_response(const FamilyDef& fam, const ToolDef& tool, const Value& arg,
                           std::uint64_t seed, bool edge_entity) {
  Record fields = oracle_fields(fam, tool, arg, seed, edge_entity);
  std::size_t oracle_bytes = serialized_size(Value(fields));
  std::size_t filler_len = 4 * oracle_bytes;
  std::string filler;
  filler.reserve(filler_len);
  std::string_view base = pools::kFillerText;
  while (filler.size() < filler_len)
    filler.append(base.substr(0, std::min(base.size(), filler_len - filler.size())));
  fields.set("verbose_context", Value(std::move(filler)));
  return Value(std::move(fields));
}

// ---------------------------------------------------------------------------
// Derived metrics (medium/hard levels)

struct MetricPlan {
  std::string metric_name;
  std::string status_name;
  std::string band_hi, band_mid, band_lo;
  std::vector<MetricSource> sources;  // resolved against the task's tools
  std::vector<double> weights;
};

// No plan at easy levels; otherwise weights by source count over the
// family's priority order filtered to the task's required tools.
inline std::optional<MetricPlan> metric_plan(const FamilyDef& fam,
                                             const std::vector<std::string>& required_tools,
                                             char level_class) {
  if (level_class == 'e') return std::nullopt;
  MetricPlan plan;
  plan.metric_name = fam.metric_name;
  plan.status_name = fam.status_name;
  plan.band_hi = fam.band_hi;
  plan.band_mid = fam.band_mid;
  plan.band_lo = fam.band_lo;
  for (const auto& src : fam.metric_priority) {
    if (std::find(required_tools.begin(), required_tools.end(), src.tool) !=
        required_tools.end())
      plan.sources.push_back(src);
    if (plan.sources.size() == 4) break;
  }
  switch (plan.sources.size()) {
    case 2: plan.weights = {0.6, 0.4}; break;
    case 3: plan.weights = {0.5, 0.3, 0.2}; break;
    case 4: plan.weights = {0.4, 0.3, 0.2, 0.1}; break;
    default: return std::nullopt;
  }
  return plan;
}

// Weighted score plus status band. Left-associative accumulation, matching
// how the composed scripts spell the same formula. Null source fields yield
// null metrics (the data needed to compute them is missing).
inline std::pair<Value, Value> metric_values(const MetricPlan& plan,
                                             const Record& entity_groups) {
  double score = 0;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    const Value* group = entity_groups.find(plan.sources[i].tool);
    if (!group || !group->is_record()) return {Value(), Value()};
    const Value* field = group->as_record().find(plan.sources[i].field);
    if (!field || !field->is_number()) return {Value(), Value()};
    score = score + field->as_number() * plan.weights[i];
  }
  std::string band = score >= 70 ? plan.band_hi : score >= 40 ? plan.band_mid : plan.band_lo;
  return {Value(score), Value(band)};
}

// ---------------------------------------------------------------------------
// Workspace

struct ToolError : std::runtime_error {
  enum class Kind { unknown_tool, malformed_args, workspace };
  Kind kind;
  ToolError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const { return root_; }

  void write_file(const std::string& name, const std::string& bytes) {
    if (done_)
      throw ToolError(ToolError::Kind::workspace, "task already claimed done; workspace is sealed");
    auto path = checked(name);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ToolError(ToolError::Kind::workspace, "cannot write '" + name + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    files_.insert(name);
  }

  std::string read_file(const std::string& name) const {
    std::ifstream in(checked(name), std::ios::binary);
    if (!in) throw ToolError(ToolError::Kind::workspace, "no such file '" + name + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  bool has_file(const std::string& name) const {
    return std::filesystem::exists(root_ / validated(name));
  }

  std::vector<std::string> list_files() const {
    return std::vector<std::string>(files_.begin(), files_.end());
  }

  void claim_done(const std::string& status) {
    if (done_)
      throw ToolError(ToolError::Kind::workspace, "claim_done may only be called once");
    done_ = true;
    done_message_ = status;
  }

  bool done() const { return done_; }
  const std::string& done_message() const { return done_message_; }

 private:
  static std::string validated(const std::string& name) {
    if (name.empty() || name.front() == '/' || name.find('\\') != std::string::npos)
      throw ToolError(ToolError::Kind::workspace, "invalid path '" + name + "'");
    std::size_t start = 0;
    while (start <= name.size()) {
      std::size_t slash = name.find('/', start);
      std::string seg = name.substr(start, slash == std::string::npos ? slash : slash - start);
      if (seg.empty() || seg == "." || seg == "..")
        throw ToolError(ToolError::Kind::workspace, "path escapes workspace: '" + name + "'");
      if (slash == std::string::npos) break;
      start = slash + 1;
    }
    return name;
  }

  std::filesystem::path checked(const std::string& name) const {
    return root_ / validated(name);
  }

  std::filesystem::path root_;
  std::set<std::string> files_;
  bool done_ = false;
  std::string done_message_;
};

// One factory per run; duplicate task ids within a run are a caller bug.
class WorkspaceFactory {
 public:
  explicit WorkspaceFactory(std::filesystem::path base) : base_(std::move(base)) {}

  Workspace make(const std::string& task_id) {
    if (!used_.insert(task_id).second)
      throw std::runtime_error("workspace for task '" + task_id + "' already exists in this run");
    return Workspace(base_ / task_id / "workspace");
  }

  std::filesystem::path task_dir(const std::string& task_id) const { return base_ / task_id; }

 private:
  std::filesystem::path base_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Registry

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> params;  // (name, semantic type)
  std::string family;
};

class Registry {
 public:
  Registry(const FamilyDef& def, std::uint64_t seed, std::set<std::string> edge_cases)
      : def_(&def), seed_(seed), edge_cases_(std::move(edge_cases)) {}

  const FamilyDef& family() const { return *def_; }
  std::uint64_t seed() const { return seed_; }
  const std::set<std::string>& edge_cases() const { return edge_cases_; }

  std::vector<ToolSpec> tool_specs() const {
    std::vector<ToolSpec> specs;
    for (const auto& t : def_->tools)
      specs.push_back({t.name, t.blurb, {{t.param, "string"}}, def_->id});
    specs.push_back({"write_file", "Save a file into the task workspace",
                     {{"path", "string"}, {"content", "string"}}, def_->id});
    specs.push_back({"read_file", "Read a file from the task workspace",
                     {{"path", "string"}}, def_->id});
    specs.push_back({"list_directory", "List workspace files", {}, def_->id});
    specs.push_back({"claim_done", "Signal task completion", {{"status", "string"}}, def_->id});
    return specs;
  }

  bool is_data_tool(std::string_view name) const { return find_tool(*def_, name) != nullptr; }

  bool is_edge_entity(const Value& arg) const {
    return arg.is_string() && edge_cases_.count(arg.as_string()) > 0;
  }

 private:
  const FamilyDef* def_;
  std::uint64_t seed_;
  std::set<std::string> edge_cases_;
};

inline Registry build_registry(const std::string& family, std::uint64_t seed,
                               std::set<std::string> edge_cases = {}) {
  const FamilyDef* def = find_family(family);
  if (!def) throw std::runtime_error("unknown task family '" + family + "'");
  return Registry(*def, seed, std::move(edge_cases));
}

// Dispatch one tool call against the registry and workspace. Data tools are
// pure; workspace tools mutate the workspace.
inline Value invoke(const Registry& reg, Workspace& ws, const std::string& tool,
                    const Record& args) {
  auto want_string_arg = [&](const char* key) -> const std::string& {
    const Value* v = args.find(key);
    if (!v || !v->is_string())
      throw ToolError(ToolError::Kind::malformed_args,
                      tool + ": missing or non-string argument '" + key + "'");
    return v->as_string();
  };

  if (tool == "write_file") {
    if (args.size() != 2)
      throw ToolError(ToolError::Kind::malformed_args, "write_file takes (path, content)");
    const std::string& path = want_string_arg("path");
    const std::string& content = want_string_arg("content");
    ws.write_file(path, content);
    return Value("File written successfully.");
  }
  if (tool == "read_file") {
    if (args.size() != 1)
      throw ToolError(ToolError::Kind::malformed_args, "read_file takes (path)");
    return Value(ws.read_file(want_string_arg("path")));
  }
  if (tool == "list_directory") {
    if (!args.empty())
      throw ToolError(ToolError::Kind::malformed_args, "list_directory takes no arguments");
    Value::List names;
    for (const auto& n : ws.list_files()) names.push_back(Value(n));
    return Value(std::move(names));
  }
  if (tool == "claim_done") {
    if (args.size() != 1)
      throw ToolError(ToolError::Kind::malformed_args, "claim_done takes (status)");
    ws.claim_done(want_string_arg("status"));
    return Value("Completion recorded.");
  }

  const ToolDef* td = find_tool(reg.family(), tool);
  if (!td)
    throw ToolError(ToolError::Kind::unknown_tool,
                    "unknown tool '" + tool + "' for family '" + reg.family().id + "'");
  if (args.size() != 1 || !args.contains(td->param))
    throw ToolError(ToolError::Kind::malformed_args,
                    tool + " takes exactly one argument '" + std::string(td->param) + "'");
  const Value& arg = *args.find(td->param);
  if (!arg.is_string() && !arg.is_null())
    throw ToolError(ToolError::Kind::malformed_args,
                    tool + ": argument '" + std::string(td->param) + "' must be a string");
  bool edge = td->link == -1 && reg.is_edge_entity(arg);
  return tool_response(reg.family(), *td, arg, reg.seed(), edge);
}

// ---------------------------------------------------------------------------
// Oracle: the exact per-entity fields a correct solution must emit, computed
// through the same pseudo-random function the tools answer from.

inline Value oracle_record(const Registry& reg, const std::vector<std::string>& entities,
                           const std::vector<std::string>& required_tools, char level_class) {
  const FamilyDef& fam = reg.family();
  auto plan = metric_plan(fam, required_tools, level_class);
  Record out;
  for (const auto& entity : entities) {
    const ToolDef& profile = fam.tools[0];
    bool edge = reg.edge_cases().count(entity) > 0;
    Record prof_fields = oracle_fields(fam, profile, Value(entity), reg.seed(), edge);
    Record groups;
    groups.set(profile.name, Value(prof_fields));
    for (const auto& tool_name : required_tools) {
      if (tool_name == profile.name) continue;
      const ToolDef* td = find_tool(fam, tool_name);
      if (!td) throw std::runtime_error("required tool not in family: " + tool_name);
      const auto& link_field = profile.fields[static_cast<std::size_t>(td->link)];
      const Value* link_value = prof_fields.find(link_field.name);
      Value arg = link_value ? *link_value : Value();
      groups.set(td->name, Value(oracle_fields(fam, *td, arg, reg.seed(), false)));
    }
    if (plan) {
      auto [score, status] = metric_values(*plan, groups);
      groups.set(plan->metric_name, score);
      groups.set(plan->status_name, status);
    }
    out.set(entity, Value(std::move(groups)));
  }
  return Value(std::move(out));
}

}  // namespace skillcraft::fabric

use super::{Section, SectionItem, Template};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown audience '{0}'")]
pub struct ViewError(pub String);

/// Filters a template down to what one audience sees.
///
/// Section order is preserved and sections left without questions are dropped.
/// The view is named `NAME@AUDIENCE`; deriving the same view twice is a no-op.
pub fn derive_audience_view(t: &Template, audience: &str) -> Result<Template, ViewError> {
    if !t.audiences.iter().any(|a| a == audience) {
        return Err(ViewError(audience.to_string()));
    }
    let suffix = format!("@{audience}");
    let name = if t.name.ends_with(&suffix) { t.name.clone() } else { format!("{}{suffix}", t.name) };
    let sections = t.sections.iter().filter_map(|s| filter_section(s, audience)).collect();
    Ok(Template { name, version: t.version, audiences: t.audiences.clone(), sections })
}

fn filter_section(section: &Section, audience: &str) -> Option<Section> {
    let items: Vec<SectionItem> = section
        .items
        .iter()
        .filter_map(|item| match item {
            SectionItem::Question(q) if q.visible_to(audience) => Some(SectionItem::Question(q.clone())),
            SectionItem::Question(_) => None,
            SectionItem::Subsection(sub) => filter_section(sub, audience).map(SectionItem::Subsection),
        })
        .collect();
    if items.is_empty() {
        None
    } else {
        Some(Section { title: section.title.clone(), items })
    }
}

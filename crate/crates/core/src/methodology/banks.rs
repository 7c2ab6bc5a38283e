//! The built-in question banks, stored verbatim (typos included).

/// Interview with a prospective FactSheet consumer about their information needs.
pub const CONSUMER_INTERVIEW: [&str; 15] = [
    "What does Carmen do now when she performs her role?",
    "What is Carmen going to be asking for when looking at a FactSheet?",
    "What decisions will she be making based on the information presented?",
    "How is the FactSheet going to help her do her job more effectively?",
    "What are the most important pieces of information that Carmen needs to know?",
    "What is Carmen's level of expertise in general data science?",
    "How is Carmen's expertise going to affect the information presented?",
    "Will there need to be additional definitions for terms that Carmen is unfamiliar with?",
    "What is Carmen's level of expertise with respect to the model algorithms being used?",
    "What explanations about the model's algorithm or results is Carmen going to need?",
    "What is Carmen's level of expertise in the problem domain?",
    "How is that going to affect the information presented?",
    "Will Carmen need help in mapping general knowledge of the problem domain to the particular inputs, outputs, or performance indicators associated with this model?",
    "Is Carmen aware of issues related to model risk, potential harm, and regulatory compliance?",
    "What information is needed assess these issues?",
];

/// Interview with a prospective fact producer about what they can record.
pub const PRODUCER_INTERVIEW: [&str; 8] = [
    "What facts does Priya wish she could conveniently record about the models she develops? It is often helpful to ask about the most recent model, or a model that was particularly important, or a model that was exceptionally difficult to produce, rather than discussing models in general.",
    "What did Priya do during the creation of this model that is otherwise unknown to others?",
    "Are there general facts about the data, the features, the model algorithm, or the training and testing Priya performs that are important to note? Why?",
    "What model-specific knowledge does she have that may not be obvious to others?",
    "What domain-specific knowledge does Priya have that may not be obvious to others?",
    "Does Priya know who will be consuming the facts she produces? We will assume it is Carmen in this particular case. Does Priya know Carmen? Have they talked about what Carmen needs to know?",
    "Is Priya aware of issues related to model risk, potential harm, and regulatory compliance?",
    "What information will be needed by others to assess these issues?",
];

/// Questions to settle while drafting a template.
pub const TEMPLATE_CHECKLIST: [&str; 9] = [
    "What are the topics or categories of information needed?",
    "Do some of these categories have subcategories?",
    "What is a meaningful name for each category or subcategory?",
    "What kinds of information should be included in each category? For example, Carmen may want to group all the model performance metrics within a category called \"Model Performance\". Information about the representativeness of the training data might be grouped with information on the sensitivity of the model to drift in a category called, 'Potential Sources of Error'.",
    "How should each question in a category be worded so as to be both understandable and evocative for Priya? The goal here is to encourage fact producers to answer in ways that are concise, germane, and understandable.",
    "Where will the answer to a question come from? Will it be generated automatically by a tool or entered by a knowledgeable human? If the former, will Priya have some control over the frequency of fact generation or the granualarity of recorded facts? If the latter, will Priya be given hints or examples of the kind of answer that would be satisfactory?",
    "Are there any regulatory, legal, or business concerns that need to be considered when answering the questions in this template?",
    "Are there different presentation formats needed for this information (for example, a short tabular summary of just key facts, or a slide format for presentations to review boards)? AI FactSheets 360 shows three different formats that might be useful.",
    "In addition to the human-readable content, is there a need for machine-readable content that Priya might generate?",
];

/// Self-assessment while filling in a template for the first time.
pub const FILLIN_CHECKLIST: [&str; 6] = [
    "Knowing what Carmen knows, will she be able to understand the information that filled-in FactSheets will include?",
    "Are there details needed by Carmen that will be missing in these FactSheets?",
    "Is there specialized language that Carmen will be unfamiliar with?",
    "Will the information allow Carmen to make the decisions she needs to make?",
    "How are these FactSheets going to help Carmen do her job more effectively?",
    "What might we do to encourage Priya to answer questions in ways that provide what Carmen needs?",
];

/// Content evaluation of a filled-in FactSheet with a consumer.
pub const CONTENT_EVAL: [&str; 12] = [
    "What information is missing?",
    "Why is that missing information important to include?",
    "How would they like this information presented?",
    "Can they give an example?",
    "What information is extraneous?",
    "Why is that information extraneous?",
    "What information is confusing or hard to understand?",
    "Why is that information hard to understand?",
    "How can that information be made more understandable?",
    "Can they give an example?",
    "Was the organization of information sensible?",
    "If not, what would they change?",
];

/// Presentation evaluation of a filled-in FactSheet with a consumer.
pub const PRESENTATION_EVAL: [&str; 12] = [
    "Is this information presented in an unexpected way?",
    "How can the information be presented differently?",
    "Why is this alternative a better way to present this information?",
    "Can they draw or describe an example?",
    "If the information presentation includes interactive elements, are they useful?",
    "How can they be made more useful?",
    "Why is that more useful?",
    "If they could add or change the way that information is presented, how would they?",
    "Why is this addition or change an improvement?",
    "Is this, overall, the right format for presenting this information?",
    "What format would be more suitable?",
    "Why is that format more suitable?",
];

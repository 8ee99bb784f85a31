"""Serialization of dialog nodes into JSGF, VoiceXML 2.0 and XHTML+Voice 1.2.

Output is deterministic and byte-stable for identical inputs. The XHTML+Voice
document is pinned to iso-8859-1; characters outside that repertoire are
emitted as numeric character references in text content.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dialog import DialogNode, DialogTree, Grammar, NodeKind
from .errors import EmptyGrammarError, UnknownNodeError, WrongNodeKindError

VOICEXML_MEDIA_TYPE = "application/voicexml+xml"
XHTML_VOICE_MEDIA_TYPE = "application/xhtml+xml"

DEFAULT_POSTBACK_URL = "/sessions/{session_id}/input"

XHTML_VOICE_DOCTYPE = (
    '<!DOCTYPE html PUBLIC "-//VoiceXML Forum//DTD XHTML+Voice 1.2//EN"\n'
    '"http://www.voicexml.org/specs/multimodal/x+v/12/dtd/xhtml+voice12.dtd">'
)

_COMMAND_JSGF = (
    "#JSGF V1.0 iso-8859-1;\n"
    "grammar commands;\n"
    "public <command> = next | previous | repeat | back | follow | home ;\n"
)


@dataclass(frozen=True)
class RenderedDocument:
    media_type: str
    body: str
    encoding: str

    def to_bytes(self) -> bytes:
        # xmlcharrefreplace is a safety net; text content is escaped at build time.
        return self.body.encode(self.encoding, errors="xmlcharrefreplace")


def _escape_text(value: str, *, latin1: bool = False) -> str:
    escaped = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    if latin1:
        escaped = escaped.encode("iso-8859-1", errors="xmlcharrefreplace").decode("iso-8859-1")
    return escaped


def _escape_attr(value: str, *, latin1: bool = False) -> str:
    return _escape_text(value, latin1=latin1).replace('"', "&quot;")


def serialize_jsgf(grammar: Grammar) -> str:
    """Textual JSGF grammar with one tagged alternative per item."""
    if not grammar.rules:
        raise EmptyGrammarError("grammar has no rules")
    alternatives = [f'{rule.text} ( $="{rule.semantic_tag}" )' for rule in grammar.rules]
    lines = [
        "#JSGF V1.0 iso-8859-1;",
        f"grammar {grammar.name};",
        "public <items> = <NULL> ( $% new Array; ) ( <item> [and] ( $%push($item) ) );",
    ]
    if len(alternatives) == 1:
        lines.append(f"<item> = {alternatives[0]} ;")
    else:
        lines.append(f"<item> = {alternatives[0]} |")
        lines.extend(f"  {alt} |" for alt in alternatives[1:-1])
        lines.append(f"  {alternatives[-1]} ;")
    return "\n".join(lines) + "\n"


def _indent_block(block: str, prefix: str) -> str:
    return "\n".join(prefix + line if line else line for line in block.rstrip("\n").split("\n"))


def render_voicexml(
    node: DialogNode,
    tree: DialogTree,
    *,
    postback_url: str = DEFAULT_POSTBACK_URL,
) -> RenderedDocument:
    """VoiceXML 2.0 document for a node: one form, one field, one grammar.

    The channel menu carries the item grammar and reads the item phrases; other
    nodes read their own prompt and accept the command vocabulary. The filled
    handler submits the recognized value to ``postback_url``.
    """
    if node.id not in tree.nodes:
        raise UnknownNodeError(f"no node {node.id!r} in dialog tree")

    if node.kind is NodeKind.CHANNEL_MENU:
        field_name = "rss_items"
        jsgf = serialize_jsgf(tree.grammar)
        spoken = " ".join(f"{rule.text}." for rule in tree.grammar.rules)
        prompt = f"{node.prompt} {spoken}" if spoken else node.prompt
    else:
        field_name = "rss_command"
        jsgf = _COMMAND_JSGF
        prompt = node.prompt

    body = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<vxml version="2.0" xmlns="http://www.w3.org/2001/vxml" xml:lang="en-US">\n'
        '  <form id="rss_form">\n'
        f'    <field name="{field_name}">\n'
        '      <grammar type="application/x-jsgf"><![CDATA[\n'
        f"{_indent_block(jsgf, '        ')}\n"
        "      ]]></grammar>\n"
        f'      <prompt bargein="true">{_escape_text(prompt)}</prompt>\n'
        "      <filled>\n"
        f'        <submit next="{_escape_attr(postback_url)}" namelist="{field_name}"/>\n'
        "      </filled>\n"
        "    </field>\n"
        "  </form>\n"
        "</vxml>\n"
    )
    return RenderedDocument(media_type=VOICEXML_MEDIA_TYPE, body=body, encoding="UTF-8")


def render_xhtml_voice(node: DialogNode, tree: DialogTree) -> RenderedDocument:
    """XHTML+Voice 1.2 page for the channel menu: voice field synced to a list.

    The head holds the voice form (modal field, JSGF grammar in CDATA, barge-in
    prompt) and the sync element binding the field to the visual ``items``
    list; the body lists every item's full title in item order.
    """
    if node.id not in tree.nodes:
        raise UnknownNodeError(f"no node {node.id!r} in dialog tree")
    if node.kind is not NodeKind.CHANNEL_MENU:
        raise WrongNodeKindError("XHTML+Voice rendering is defined for the channel menu only")

    jsgf = serialize_jsgf(tree.grammar)
    options = "\n".join(
        f"      <option> {_escape_text(item.title, latin1=True)} </option>"
        for item in tree.feed.items
    )
    title = _escape_text(tree.feed.channel.title, latin1=True)

    body = (
        '<?xml version="1.0" encoding="iso-8859-1"?>\n'
        f"{XHTML_VOICE_DOCTYPE}\n"
        '<html xmlns="http://www.w3.org/1999/xhtml"\n'
        'xmlns:vxml="http://www.w3.org/2001/vxml"\n'
        'xmlns:ev="http://www.w3.org/2001/xml-events"\n'
        'xmlns:xv="http://www.voicexml.org/2002/xhtml+voice"\n'
        'xml:lang="en-US">\n'
        "  <head>\n"
        f"    <title>{title}</title>\n"
        '    <vxml:form id="rss_form">\n'
        '      <vxml:field name="rss_items" xv:id="rss_items_name" modal="true">\n'
        "        <vxml:grammar>\n"
        "          <![CDATA[\n"
        f"{_indent_block(jsgf, '            ')}\n"
        "          ]]>\n"
        "        </vxml:grammar>\n"
        f'        <vxml:prompt bargein="true"> {_escape_text(node.prompt, latin1=True)} </vxml:prompt>\n'
        "      </vxml:field>\n"
        "    </vxml:form>\n"
        '    <xv:sync xv:field="#rss_items_name" xv:input="items"/>\n'
        "  </head>\n"
        "  <body>\n"
        f"    <h1>{title}</h1>\n"
        '    <select name="items" id="items" multiple="multiple" size="10" width="100%">\n'
        f"{options}\n"
        "    </select>\n"
        "  </body>\n"
        "</html>\n"
    )
    return RenderedDocument(media_type=XHTML_VOICE_MEDIA_TYPE, body=body, encoding="iso-8859-1")

# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

from os import listdir
from os.path import abspath, dirname, isfile, join
import re

estimator_regex = re.compile(r'(@estimator\(.*?\)\ndef.*?)(?=@estimator|\ndef |\Z)', re.DOTALL)
parse_regex = re.compile(r'@estimator\((?P<aliases>.*?)\)\ndef (?P<name>\w+)'
                         r'\(.*?\):.*?(?P<docs>(?:\s+#-[^\n]*?\n)+)', re.DOTALL)
estimator_name_regex = re.compile(r'def (?P<name>\w+)')
whitespace_regex = re.compile(r' +#- ?')

base_path = dirname(abspath(__file__))


def get_estimators(path=None):
    """Get the documented estimators from all the estimator files."""
    path = path or join(base_path, '..', 'estimators')
    files = sorted(join(path, f) for f in listdir(path)
                   if isfile(join(path, f)) and f.endswith('.py'))
    estimators = {}
    for file in files:
        with open(file, 'r', encoding='utf-8', errors='replace') as f:
            data = f.read()
        for block in re.findall(estimator_regex, data):
            docs = parse_estimator(block)
            if docs:
                estimators[docs["name"]] = docs
    return estimators


def parse_estimator(block):
    """Parse an estimator and its documentation."""
    m = re.match(parse_regex, block)
    if m:
        return {"name": m.group('name'), "aliases": m.group("aliases").replace('"', ''),
                "docs": parse_docs(m.group('docs'))}
    m = re.search(estimator_name_regex, block)
    if m:
        print("No documentation found for {}.".format(m.group('name')))
    return None


def parse_docs(docs):
    """Remove unnecessary formatting from the documentation blocks."""
    docs = docs.strip('\n')
    docs = re.sub(whitespace_regex, '', docs)
    return docs


def format_docs(estimators):
    """Format the docs into markdown."""
    text = ""
    for key in sorted(estimators):
        if estimators[key]["aliases"] != "":
            text += "### {name}\nAliases: {aliases}\n\n{docs}\n\n".format(**estimators[key])
        else:
            text += "### {name}\n\n{docs}\n\n".format(**estimators[key])
    return text


def write_docs(template=None, out=None, path=None):
    """Insert the docs into the template and write the markdown."""
    template = template or join(base_path, 'docs_template.md')
    out = out or join(base_path, 'methods.md')
    with open(template, 'r', encoding='utf-8') as f:
        md_template = f.read()
    text = md_template.format(estimators=format_docs(get_estimators(path)))
    with open(out, 'w', encoding='utf-8') as outfile:
        outfile.write(text)
    return text


if __name__ == "__main__":
    write_docs()

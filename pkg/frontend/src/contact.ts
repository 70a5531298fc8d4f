/** Start a conversation from the yellow pages.
 *
 * Opening the URI is the user-visible half; the other half posts the
 * contact as a manual communication event so it shows up on the map
 * like any other exchange.
 */

import type { MapClient } from "./api";
import type { ProfileData } from "./types";

export class MissingContactError extends Error {
  constructor(profile: string, scheme: string) {
    super(`participant '${profile}' has no ${scheme} contact entry`);
    this.name = "MissingContactError";
  }
}

/** Which event channel a contact scheme stands for. */
export const CHANNEL_BY_SCHEME: Record<string, string> = {
  mailto: "mail",
  tel: "phone",
  chat: "text-chat",
  xmpp: "text-chat",
};

export interface ContactDeps {
  client: MapClient;
  /** participant id of the person using this browser */
  viewer: string;
  opener: (uri: string) => void;
  now?: () => Date;
  makeId?: () => string;
}

export async function initiateContact(
  profile: ProfileData,
  scheme: string,
  deps: ContactDeps,
): Promise<{ id: string; uri: string }> {
  const entry = profile.contacts.find((c) => c.scheme === scheme);
  if (entry === undefined) {
    throw new MissingContactError(profile.id, scheme);
  }
  const uri = `${scheme}:${entry.address}`;
  deps.opener(uri);
  const id = (deps.makeId ?? defaultId)();
  const start = (deps.now ?? (() => new Date()))().toISOString();
  await deps.client.postEvent({
    id,
    participants: [deps.viewer, profile.id],
    channel: CHANNEL_BY_SCHEME[scheme] ?? scheme,
    start,
  });
  return { id, uri };
}

function defaultId(): string {
  return `manual-${crypto.randomUUID()}`;
}
